//! Seeded property campaigns with replayable counterexamples.
//!
//! Every trial derives its own seed from the campaign seed and trial
//! index, so a single recorded `trial_seed` regenerates the exact
//! instances. Counterexamples embed the offending documents for
//! inspection; replay re-runs each recorded trial and checks that the
//! verdicts reproduce.

use std::time::Instant;

use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use pmcone_core::gen;
use pmcone_core::metric::{doubletons, Pseudometric, UPair};
use pmcone_core::peaks::{densify_to_pp, in_peak_cone, peak_cone_sum, peak_translate, peaking_metric_at};
use pmcone_core::recover::{
    full_recovery, FnOracle, InducedOracle, PointMap, RecoveryConfig, RecoveryStage, Uniqueness,
};
use pmcone_core::scalar::{frac, int, Scalar};
use pmcone_core::FiniteSpace;

use crate::doc::{MetricDocument, SpaceDocument};
use crate::CliError;

const TRIAL_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "lower")]
pub enum Suite {
    Core,
    Extend,
    Peaks,
    Recover,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Extend => "extend",
            Suite::Peaks => "peaks",
            Suite::Recover => "recover",
            Suite::All => "all",
        }
    }

    fn for_trial(self, trial: usize) -> Suite {
        match self {
            Suite::All => [Suite::Core, Suite::Extend, Suite::Peaks, Suite::Recover][trial % 4],
            s => s,
        }
    }

    fn from_name(name: &str) -> Result<Suite, CliError> {
        match name {
            "core" => Ok(Suite::Core),
            "extend" => Ok(Suite::Extend),
            "peaks" => Ok(Suite::Peaks),
            "recover" => Ok(Suite::Recover),
            "all" => Ok(Suite::All),
            other => Err(CliError::parse(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FuzzOptions {
    pub seed: u64,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub suite: Suite,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub message: String,
    pub space: SpaceDocument,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub trial_seed: u64,
    pub suite: String,
    pub n: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub suite: String,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub failures: usize,
    pub results: Vec<TrialRecord>,
    /// Wall-clock only; excluded from determinism comparisons.
    pub timing_ms: u128,
}

pub fn trial_seed(campaign_seed: u64, trial: usize) -> u64 {
    campaign_seed.wrapping_add((trial as u64).wrapping_mul(TRIAL_SEED_STRIDE))
}

pub fn run_campaign(opts: &FuzzOptions) -> Result<CampaignReport, CliError> {
    if opts.n_min < 2 || opts.n_min > opts.n_max {
        return Err(CliError::parse(format!(
            "invalid point range {}..{}",
            opts.n_min, opts.n_max
        )));
    }
    let start = Instant::now();
    let mut results = Vec::with_capacity(opts.trials);
    let mut failures = 0usize;
    for trial in 0..opts.trials {
        let seed = trial_seed(opts.seed, trial);
        let suite = opts.suite.for_trial(trial);
        let record = run_trial(trial, suite, seed, opts.n_min, opts.n_max);
        if !record.pass {
            failures += 1;
        }
        results.push(record);
    }
    Ok(CampaignReport {
        seed: opts.seed,
        suite: opts.suite.name().to_string(),
        trials: opts.trials,
        n_min: opts.n_min,
        n_max: opts.n_max,
        failures,
        results,
        timing_ms: start.elapsed().as_millis(),
    })
}

/// Re-run every recorded trial and check that its verdict reproduces.
/// Returns the fresh report; any divergence is an error.
pub fn replay(report: &CampaignReport) -> Result<CampaignReport, CliError> {
    // Embedded counterexamples must still parse and re-validate.
    for record in &report.results {
        if let Some(ce) = &record.counterexample {
            ce.space.to_space()?;
            for m in &ce.metrics {
                // The embedded metrics are instances, not necessarily valid
                // pseudometrics; they must at least be well-formed matrices.
                let _ = m.matrix();
            }
        }
    }
    let start = Instant::now();
    let mut results = Vec::with_capacity(report.results.len());
    let mut failures = 0usize;
    for record in &report.results {
        let suite = Suite::from_name(&record.suite)?;
        let fresh = run_trial(record.trial, suite, record.trial_seed, report.n_min, report.n_max);
        if fresh.pass != record.pass || fresh.n != record.n {
            return Err(CliError::domain(format!(
                "trial {} did not reproduce: recorded pass={} n={}, got pass={} n={}",
                record.trial, record.pass, record.n, fresh.pass, fresh.n
            )));
        }
        if !fresh.pass {
            failures += 1;
        }
        results.push(fresh);
    }
    Ok(CampaignReport {
        seed: report.seed,
        suite: report.suite.clone(),
        trials: report.results.len(),
        n_min: report.n_min,
        n_max: report.n_max,
        failures,
        results,
        timing_ms: start.elapsed().as_millis(),
    })
}

fn run_trial(trial: usize, suite: Suite, seed: u64, n_min: usize, n_max: usize) -> TrialRecord {
    let mut rng = gen::seeded(seed);
    let n = rng.gen_range(n_min..=n_max);
    let space = gen::random_space(n, &mut rng);
    let outcome = match suite {
        Suite::Core => core_trial(&space, &mut rng),
        Suite::Extend => extend_trial(&space, &mut rng),
        Suite::Peaks => peaks_trial(&space, seed, &mut rng),
        Suite::Recover => recover_trial(&space, seed, &mut rng),
        Suite::All => unreachable!("resolved per trial"),
    };
    let (pass, counterexample) = match outcome {
        Ok(()) => (true, None),
        Err((message, metrics)) => (
            false,
            Some(Counterexample {
                message,
                space: SpaceDocument::from_space(&space),
                metrics: metrics
                    .iter()
                    .map(|m| MetricDocument::from_metric(m, None))
                    .collect(),
            }),
        ),
    };
    TrialRecord {
        trial,
        trial_seed: seed,
        suite: suite.name().to_string(),
        n,
        pass,
        counterexample,
    }
}

type TrialOutcome = Result<(), (String, Vec<Pseudometric>)>;

fn fail(message: String, metrics: &[&Pseudometric]) -> TrialOutcome {
    Err((message, metrics.iter().map(|m| (*m).clone()).collect()))
}

fn brute_force_peaks(d: &Pseudometric) -> std::collections::BTreeSet<UPair> {
    let n = d.point_count();
    let norm = d.norm();
    let mut out = std::collections::BTreeSet::new();
    if norm.is_zero() {
        for i in 0..n {
            out.insert(UPair::new(i, i));
        }
        return out;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if *d.get(i, j) == norm {
                out.insert(UPair::new(i, j));
            }
        }
    }
    out
}

fn core_trial(space: &FiniteSpace, rng: &mut impl Rng) -> TrialOutcome {
    let n = space.point_count();
    let d = gen::random_pseudometric(n, rng);
    let e = gen::random_pseudometric(n, rng);
    let f = gen::random_pseudometric(n, rng);

    let sum = d.add(&e).expect("same size");
    if Pseudometric::from_matrix(&sum.rows()).is_err() {
        return fail("cone sum left the cone".into(), &[&d, &e]);
    }
    if sum.norm() > d.norm() + e.norm() {
        return fail("norm not subadditive".into(), &[&d, &e]);
    }
    let c = frac(rng.gen_range(0..9), 2);
    let scaled = d.scale(&c).expect("nonnegative");
    if Pseudometric::from_matrix(&scaled.rows()).is_err() || scaled.norm() != &c * d.norm() {
        return fail(format!("scaling by {c} misbehaved"), &[&d]);
    }
    let de = d.sup_distance(&e).expect("same size");
    let df = d.sup_distance(&f).expect("same size");
    let fe = f.sup_distance(&e).expect("same size");
    if de > df + fe {
        return fail("sup-distance triangle inequality failed".into(), &[&d, &e, &f]);
    }
    if d.peak_set().pairs() != &brute_force_peaks(&d) {
        return fail("peak set differs from brute-force argmax".into(), &[&d]);
    }
    if !d.add(space.ambient()).expect("same size").is_admissible() {
        return fail("sum with the ambient metric not admissible".into(), &[&d]);
    }
    Ok(())
}

fn extend_trial(space: &FiniteSpace, rng: &mut impl Rng) -> TrialOutcome {
    let n = space.point_count();
    let size = rng.gen_range(1..=n);
    let mut subset = gen::random_permutation(n, rng);
    subset.truncate(size);
    let partial_metric = gen::random_pseudometric(size, rng);
    let partial = pmcone_core::extend::PartialPseudometric::new(
        space,
        &subset,
        &partial_metric.rows(),
    )
    .expect("generated restrictions are valid");
    let extended = partial.extend();
    if Pseudometric::from_matrix(&extended.rows()).is_err() {
        return fail("extension is not a pseudometric".into(), &[&partial_metric]);
    }
    for (p, &a) in subset.iter().enumerate() {
        for (q, &b) in subset.iter().enumerate() {
            if extended.get(a, b) != partial_metric.get(p, q) {
                return fail(
                    format!("restriction differs at ({a},{b})"),
                    &[&partial_metric, &extended],
                );
            }
        }
    }
    if extended.norm() != partial_metric.norm() {
        return fail("extension changed the norm".into(), &[&partial_metric, &extended]);
    }
    Ok(())
}

fn peaks_trial(space: &FiniteSpace, seed: u64, rng: &mut impl Rng) -> TrialOutcome {
    let n = space.point_count();
    let epsilon = [int(1), frac(1, 2), frac(1, 4), frac(1, 8)][(seed % 4) as usize].clone();
    let d = gen::random_pseudometric(n, rng);
    let out = densify_to_pp(space, &d, &epsilon).expect("valid inputs");
    if !out.perturbed.in_pp() {
        return fail("densified output not in the unique-peak class".into(), &[&d]);
    }
    let moved = out.perturbed.sup_distance(&d).expect("same size");
    if moved > int(4) * &epsilon + &out.repair_norm {
        return fail("densification moved too far".into(), &[&d, &out.perturbed]);
    }
    if *out.perturbed.at(out.pair) != &out.base_value + int(4) * &out.epsilon {
        return fail("densified peak value is off".into(), &[&d, &out.perturbed]);
    }

    let adm = gen::random_admissible(n, rng);
    let pair = doubletons(n).nth(rng.gen_range(0..n * (n - 1) / 2)).expect("in range");
    let t = peak_translate(space, &adm, pair).expect("valid inputs");
    let peaked = adm.add(&t.rho).expect("same size");
    if t.base_value > t.breadth
        || t.rho.norm() != int(4) * &t.breadth
        || *peaked.at(pair) != t.peak_value()
        || !peaked.in_pp()
        || !in_peak_cone(&peaked, pair)
    {
        return fail("translation contract failed".into(), &[&adm, &t.rho]);
    }

    let parts: Vec<Pseudometric> = (0..rng.gen_range(2..=3))
        .map(|_| peaking_metric_at(space, pair, rng.gen_range(0..1u64 << 32)).expect("valid"))
        .collect();
    let sum = peak_cone_sum(&parts, pair).expect("shared peak");
    let total: Scalar = parts.iter().map(|p| p.norm()).sum();
    if sum.norm() != total || !in_peak_cone(&sum, pair) {
        return fail("shared-peak sum lost additivity".into(), &parts.iter().collect::<Vec<_>>());
    }
    Ok(())
}

fn recover_trial(space: &FiniteSpace, seed: u64, rng: &mut impl Rng) -> TrialOutcome {
    let n = space.point_count();
    let codomain = gen::random_space(n, rng);
    let config = RecoveryConfig { budget: 16, sample_count: 10, seed };
    match seed % 3 {
        0 => {
            let map = gen::random_permutation(n, rng);
            let phi = PointMap::bijection(map, Uniqueness::Unique).expect("permutation");
            let oracle =
                InducedOracle::new(space.clone(), codomain, phi.clone()).expect("sizes match");
            match full_recovery(&oracle, &config) {
                Ok(out) => {
                    if n > 2 && out.point_map.as_slice() != phi.as_slice() {
                        return fail("recovered a different bijection".into(), &[]);
                    }
                    Ok(())
                }
                Err(f) => fail(format!("canonical oracle failed at {} stage", f.stage), &[]),
            }
        }
        1 => {
            let offset = gen::random_admissible(n, rng);
            let off = offset.clone();
            let oracle = FnOracle::new(space.clone(), space.clone(), move |d| {
                d.add(&off).expect("same size")
            });
            match full_recovery(&oracle, &config) {
                Err(f) if f.stage == RecoveryStage::ZeroPreservation => Ok(()),
                Err(f) => fail(
                    format!("translation failed at {} instead of zero-preservation", f.stage),
                    &[&offset],
                ),
                Ok(_) => fail("translation oracle was accepted".into(), &[&offset]),
            }
        }
        _ => {
            let oracle = FnOracle::new(space.clone(), space.clone(), |d| {
                d.scale(&int(2)).expect("nonnegative")
            });
            match full_recovery(&oracle, &config) {
                Err(f) if f.stage == RecoveryStage::Isometry => Ok(()),
                Err(f) => {
                    fail(format!("scaling failed at {} instead of isometry", f.stage), &[])
                }
                Ok(_) => fail("scaling oracle was accepted".into(), &[]),
            }
        }
    }
}
