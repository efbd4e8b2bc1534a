//! Command-line front end.
//!
//! Subcommands: `validate`, `extend`, `perturb`, `recover`, `fuzz`.
//! Exit codes: 0 success, 1 domain violation, 2 parse error, 3-7 recovery
//! stage failures (isometry, zero, pairs, points, formula).

mod doc;
mod fuzz;
mod oracle;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use pmcone_core::extend::PartialPseudometric;
use pmcone_core::metric::{Pseudometric, UPair};
use pmcone_core::peaks::{densify_to_pp, peak_translate};
use pmcone_core::recover::{
    full_recovery, RecoveryConfig, RecoveryStage, StageFailure, ZeroFailure,
};
use pmcone_core::scalar::Scalar;
use pmcone_core::FiniteSpace;

use doc::{
    display_rational, rational_text, MetricDocument, OracleSpec, PointMapDocument, SpaceDocument,
    ViolationDocument,
};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or unparseable input (exit 2).
    Parse(String),
    /// Well-formed input that violates a domain contract (exit 1).
    Domain(String),
}

impl CliError {
    pub fn parse(message: String) -> Self {
        CliError::Parse(message)
    }

    pub fn domain(message: String) -> Self {
        CliError::Domain(message)
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Domain(m) => m,
        }
    }
}

fn stage_exit_code(stage: RecoveryStage) -> u8 {
    match stage {
        RecoveryStage::Isometry => 3,
        RecoveryStage::ZeroPreservation => 4,
        RecoveryStage::PairRecovery => 5,
        RecoveryStage::PointRecovery => 6,
        RecoveryStage::CanonicalFormula => 7,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "pmcone", version, about = "Exact pseudometric cones on finite spaces: validation, norm-preserving extension, unique-peak perturbations, and bijection recovery from isometry oracles")]
struct Cli {
    /// Seed for everything randomized.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Render rationals as decimal approximations (text output only;
    /// JSON stays exact).
    #[arg(long, global = true, conflicts_with = "exact")]
    float: bool,

    /// Render rationals exactly (the default).
    #[arg(long, global = true)]
    exact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the pseudometric axioms of a metric document and report the
    /// class memberships.
    Validate {
        /// Pseudometric document (JSON).
        file: PathBuf,
    },
    /// Extend a pseudometric from a subset to the whole space, preserving
    /// its norm exactly.
    Extend {
        /// Space document (JSON).
        #[arg(long)]
        space: PathBuf,
        /// Comma-separated labels of the subset carrying the data.
        #[arg(long)]
        subset: String,
        /// Pseudometric document on the subset (JSON).
        #[arg(long)]
        partial: PathBuf,
    },
    /// Perturb a pseudometric into the unique-peak class.
    Perturb {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// dense: nudge within 4*epsilon; translate: add a summand peaking
        /// at a chosen pair.
        #[arg(long, value_enum)]
        mode: PerturbMode,
        /// Pair labels "x,y" (translate mode).
        #[arg(long)]
        pair: Option<String>,
        /// Perturbation scale (dense mode), default 1.
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Run the recovery pipeline against an oracle specification.
    Recover {
        #[arg(long)]
        space_x: PathBuf,
        #[arg(long)]
        space_y: PathBuf,
        /// Oracle specification document (JSON).
        #[arg(long)]
        oracle: PathBuf,
        /// Peaking metrics generated per doubleton before giving up.
        #[arg(long, default_value_t = 16)]
        budget: usize,
        /// Sample count for the isometry and formula stages.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Run a seeded property campaign; nonzero exit iff a trial fails.
    Fuzz {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = fuzz::Suite::All)]
        suite: fuzz::Suite,
        /// Re-run a saved campaign report and check that every verdict
        /// reproduces.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PerturbMode {
    Dense,
    Translate,
}

struct Output {
    json: Value,
    text: String,
    exit: u8,
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::parse(format!("cannot parse {}: {e}", path.display())))
}

fn label_for(labels: Option<&[String]>, index: usize) -> String {
    match labels {
        Some(ls) if index < ls.len() => ls[index].clone(),
        _ => index.to_string(),
    }
}

fn pair_labels(labels: Option<&[String]>, pair: UPair) -> Vec<String> {
    if pair.is_doubleton() {
        vec![label_for(labels, pair.lo()), label_for(labels, pair.hi())]
    } else {
        vec![label_for(labels, pair.lo())]
    }
}

fn matrix_text(d: &Pseudometric, float: bool) -> String {
    let mut out = String::new();
    for row in d.rows() {
        let cells: Vec<String> = row.iter().map(|s| display_rational(s, float)).collect();
        let _ = writeln!(out, "  {}", cells.join(" "));
    }
    out
}

fn parse_pair(space: &FiniteSpace, text: &str) -> Result<UPair, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::parse(format!("pair must be two labels, got {text:?}")));
    }
    let a = space
        .index_of(parts[0])
        .ok_or_else(|| CliError::domain(format!("unknown label {:?}", parts[0])))?;
    let b = space
        .index_of(parts[1])
        .ok_or_else(|| CliError::domain(format!("unknown label {:?}", parts[1])))?;
    UPair::doubleton(a, b)
        .ok_or_else(|| CliError::domain(format!("pair labels must differ, got {text:?}")))
}

fn cmd_validate(file: &Path, float: bool) -> Result<Output, CliError> {
    let document: MetricDocument = load_json(file)?;
    let matrix = document.matrix();
    let labels = document.points.as_deref().filter(|p| p.len() == matrix.len());
    match Pseudometric::from_matrix(&matrix) {
        Err(violation) => {
            let vdoc = ViolationDocument::from_violation(&violation);
            let text = format!(
                "invalid: {}\naxiom: {}, witness: {:?}\n",
                vdoc.message, vdoc.axiom, vdoc.witness
            );
            Ok(Output { json: json!({ "valid": false, "violation": vdoc }), text, exit: 1 })
        }
        Ok(metric) => {
            let peaks: Vec<Vec<String>> =
                metric.peak_set().iter().map(|p| pair_labels(labels, *p)).collect();
            let pc = metric.in_pc();
            let json = json!({
                "valid": true,
                "points": metric.point_count(),
                "norm": rational_text(&metric.norm()),
                "admissible": metric.is_admissible(),
                "in_pp": metric.in_pp(),
                "in_pc": pc.is_some(),
                "pc_witness": pc.map(|w| w.iter().map(|&i| label_for(labels, i)).collect::<Vec<_>>()),
                "peak_pairs": peaks,
            });
            let mut text = format!(
                "valid pseudometric on {} points\nnorm: {}\nadmissible: {}\nunique-peak (Pp): {}\ncompact-peak (Pc): {}\n",
                metric.point_count(),
                display_rational(&metric.norm(), float),
                metric.is_admissible(),
                metric.in_pp(),
                metric.in_pc().is_some(),
            );
            let rendered: Vec<String> =
                peaks.iter().map(|p| format!("{{{}}}", p.join(","))).collect();
            let _ = writeln!(text, "peak pairs: {}", rendered.join(" "));
            Ok(Output { json, text, exit: 0 })
        }
    }
}

fn cmd_extend(space: &Path, subset: &str, partial: &Path, float: bool) -> Result<Output, CliError> {
    let space = load_json::<SpaceDocument>(space)?.to_space()?;
    let labels: Vec<&str> = subset.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if labels.is_empty() {
        return Err(CliError::parse("subset must list at least one label".to_string()));
    }
    let mut indices = Vec::with_capacity(labels.len());
    for l in &labels {
        indices.push(
            space
                .index_of(l)
                .ok_or_else(|| CliError::domain(format!("unknown subset label {l:?}")))?,
        );
    }
    let document: MetricDocument = load_json(partial)?;
    if let Some(points) = &document.points {
        if points.iter().map(String::as_str).ne(labels.iter().copied()) {
            return Err(CliError::domain(
                "partial document points disagree with --subset".to_string(),
            ));
        }
    }
    let partial = PartialPseudometric::new(&space, &indices, &document.matrix())
        .map_err(|e| CliError::domain(format!("partial pseudometric invalid: {e}")))?;
    let lipschitz = partial.lipschitz_constant();
    let cap = partial.norm();
    let extended = partial.extend();
    let out_doc = MetricDocument::from_metric(&extended, Some(space.labels()));
    let json = json!({
        "points": space.labels(),
        "entries": out_doc.entries,
        "provenance": {
            "lipschitz": rational_text(&lipschitz),
            "cap": rational_text(&cap),
        },
    });
    let text = format!(
        "extended pseudometric on {} points (lipschitz {}, cap {})\n{}",
        space.point_count(),
        display_rational(&lipschitz, float),
        display_rational(&cap, float),
        matrix_text(&extended, float),
    );
    Ok(Output { json, text, exit: 0 })
}

fn cmd_perturb(
    space: &Path,
    metric: &Path,
    mode: PerturbMode,
    pair: Option<&str>,
    epsilon: Option<&str>,
    float: bool,
) -> Result<Output, CliError> {
    let space = load_json::<SpaceDocument>(space)?.to_space()?;
    let metric = load_json::<MetricDocument>(metric)?.to_metric()?;
    match mode {
        PerturbMode::Dense => {
            let epsilon: Scalar = match epsilon {
                None => pmcone_core::scalar::int(1),
                Some(text) => doc::parse_rational(text).map_err(CliError::parse)?,
            };
            let out = densify_to_pp(&space, &metric, &epsilon)
                .map_err(|e| CliError::domain(e.to_string()))?;
            let moved = out.perturbed.sup_distance(&metric).expect("same size");
            let json = json!({
                "mode": "dense",
                "peak_pair": pair_labels(Some(space.labels()), out.pair),
                "peak_value": rational_text(&out.peak_value()),
                "base_value": rational_text(&out.base_value),
                "epsilon_used": rational_text(&out.epsilon),
                "repair_norm": rational_text(&out.repair_norm),
                "sup_distance": rational_text(&moved),
                "perturbed": MetricDocument::from_metric(&out.perturbed, Some(space.labels())),
            });
            let text = format!(
                "densified into the unique-peak class\npeak pair: {{{},{}}}\npeak value: {}\nepsilon used: {}\nrepair norm: {}\nsup-distance moved: {}\n{}",
                space.label(out.pair.lo()),
                space.label(out.pair.hi()),
                display_rational(&out.peak_value(), float),
                display_rational(&out.epsilon, float),
                display_rational(&out.repair_norm, float),
                display_rational(&moved, float),
                matrix_text(&out.perturbed, float),
            );
            Ok(Output { json, text, exit: 0 })
        }
        PerturbMode::Translate => {
            let pair_text = pair.ok_or_else(|| {
                CliError::parse("translate mode needs --pair \"x,y\"".to_string())
            })?;
            let pair = parse_pair(&space, pair_text)?;
            let out = peak_translate(&space, &metric, pair)
                .map_err(|e| CliError::domain(e.to_string()))?;
            let translated = metric.add(&out.rho).expect("same size");
            let json = json!({
                "mode": "translate",
                "pair": pair_labels(Some(space.labels()), pair),
                "base_value": rational_text(&out.base_value),
                "breadth": rational_text(&out.breadth),
                "summand_norm": rational_text(&out.rho.norm()),
                "peak_value": rational_text(&out.peak_value()),
                "repair_norm": rational_text(&out.repair_norm),
                "summand": MetricDocument::from_metric(&out.rho, Some(space.labels())),
                "translated": MetricDocument::from_metric(&translated, Some(space.labels())),
            });
            let text = format!(
                "translated into the peak cone at {{{},{}}}\nbase value: {}\nbreadth: {}\nsummand norm: {}\npeak value: {}\nrepair norm: {}\nsummand:\n{}translated:\n{}",
                space.label(pair.lo()),
                space.label(pair.hi()),
                display_rational(&out.base_value, float),
                display_rational(&out.breadth, float),
                display_rational(&out.rho.norm(), float),
                display_rational(&out.peak_value(), float),
                display_rational(&out.repair_norm, float),
                matrix_text(&out.rho, float),
                matrix_text(&translated, float),
            );
            Ok(Output { json, text, exit: 0 })
        }
    }
}

fn stage_failure_json(failure: &StageFailure) -> Value {
    match failure {
        StageFailure::Isometry(ce) => json!({
            "left": MetricDocument::from_metric(&ce.left, None),
            "right": MetricDocument::from_metric(&ce.right, None),
            "input_distance": rational_text(&ce.input_distance),
            "output_distance": rational_text(&ce.output_distance),
        }),
        StageFailure::Zero(ZeroFailure::ZeroNotFixed { image }) => json!({
            "zero_image": MetricDocument::from_metric(image, None),
        }),
        StageFailure::Zero(ZeroFailure::InverseZeroNotFixed { image }) => json!({
            "inverse_zero_image": MetricDocument::from_metric(image, None),
        }),
        StageFailure::Zero(ZeroFailure::NormChanged { sample, input_norm, output_norm }) => json!({
            "sample": MetricDocument::from_metric(sample, None),
            "input_norm": rational_text(input_norm),
            "output_norm": rational_text(output_norm),
        }),
        StageFailure::Pairs(e) => json!({ "detail": e.to_string() }),
        StageFailure::Points(e) => json!({ "detail": e.to_string() }),
        StageFailure::Formula(report) => json!({
            "violations": report
                .violations
                .iter()
                .take(8)
                .map(|v| json!({
                    "sample": v.sample_index,
                    "pair": [v.pair.lo(), v.pair.hi()],
                    "image_value": rational_text(&v.image_value),
                    "expected": rational_text(&v.expected),
                }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn stage_failure_text(failure: &StageFailure) -> String {
    match failure {
        StageFailure::Isometry(ce) => format!(
            "sup-distance {} became {}",
            rational_text(&ce.input_distance),
            rational_text(&ce.output_distance)
        ),
        StageFailure::Zero(ZeroFailure::ZeroNotFixed { image }) => {
            format!("image of zero has norm {}", rational_text(&image.norm()))
        }
        StageFailure::Zero(ZeroFailure::InverseZeroNotFixed { image }) => {
            format!("inverse image of zero has norm {}", rational_text(&image.norm()))
        }
        StageFailure::Zero(ZeroFailure::NormChanged { input_norm, output_norm, .. }) => format!(
            "norm {} became {}",
            rational_text(input_norm),
            rational_text(output_norm)
        ),
        StageFailure::Pairs(e) => e.to_string(),
        StageFailure::Points(e) => e.to_string(),
        StageFailure::Formula(report) => {
            format!("{} formula violations", report.violations.len())
        }
    }
}

fn cmd_recover(
    space_x: &Path,
    space_y: &Path,
    oracle_path: &Path,
    budget: usize,
    samples: usize,
    seed: u64,
) -> Result<Output, CliError> {
    let x = load_json::<SpaceDocument>(space_x)?.to_space()?;
    let y = load_json::<SpaceDocument>(space_y)?.to_space()?;
    let spec: OracleSpec = load_json(oracle_path)?;
    let oracle = oracle::build_oracle(&spec, &x, &y)?;
    let config = RecoveryConfig { budget, sample_count: samples, seed };
    match full_recovery(&oracle, &config) {
        Ok(out) => {
            let phi_doc = PointMapDocument::new(&out.point_map, &x, &y);
            let json = json!({
                "recovered": true,
                "phi": phi_doc,
                "stages": {
                    "isometry": { "passed": true, "pairs_checked": out.isometry.pairs_checked },
                    "zero_preservation": {
                        "passed": true,
                        "ladder_size": out.zero.ladder_size,
                        "inverse_checked": out.zero.inverse_checked,
                    },
                    "pair_recovery": { "passed": true },
                    "point_recovery": { "passed": true },
                    "canonical_formula": {
                        "passed": true,
                        "samples_checked": out.formula.samples_checked,
                        "pairs_checked": out.formula.pairs_checked,
                    },
                },
            });
            let mut text = format!(
                "recovered bijection ({}):\n",
                match out.point_map.uniqueness() {
                    pmcone_core::recover::Uniqueness::Unique => "unique",
                    pmcone_core::recover::Uniqueness::AmbiguousCard2 =>
                        "ambiguous: two-point spaces admit both bijections",
                }
            );
            for y_idx in 0..out.point_map.len() {
                let _ = writeln!(
                    text,
                    "  {} -> {}",
                    y.label(y_idx),
                    x.label(out.point_map.apply(y_idx))
                );
            }
            let _ = writeln!(
                text,
                "stages: isometry ok ({} pairs), zero-preservation ok (ladder {}{}), pair-recovery ok, point-recovery ok, formula ok ({} samples)",
                out.isometry.pairs_checked,
                out.zero.ladder_size,
                if out.zero.inverse_checked { ", inverse checked" } else { ", inverse unavailable" },
                out.formula.samples_checked,
            );
            Ok(Output { json, text, exit: 0 })
        }
        Err(failure) => {
            let json = json!({
                "recovered": false,
                "failed_stage": failure.stage.to_string(),
                "diagnostic": stage_failure_text(&failure.failure),
                "witness": stage_failure_json(&failure.failure),
            });
            let text = format!(
                "recovery failed at the {} stage\n{}\n",
                failure.stage,
                stage_failure_text(&failure.failure)
            );
            Ok(Output { json, text, exit: stage_exit_code(failure.stage) })
        }
    }
}

fn fuzz_text(report: &fuzz::CampaignReport) -> String {
    let mut text = format!(
        "campaign seed {}, suite {}, {} trials, n in [{},{}]\nfailures: {}\n",
        report.seed, report.suite, report.trials, report.n_min, report.n_max, report.failures
    );
    for record in report.results.iter().filter(|r| !r.pass) {
        let message =
            record.counterexample.as_ref().map(|c| c.message.as_str()).unwrap_or("unknown");
        let _ = writeln!(
            text,
            "  trial {} (suite {}, seed {}, n {}): {message}",
            record.trial, record.suite, record.trial_seed, record.n
        );
    }
    let _ = writeln!(text, "elapsed: {} ms", report.timing_ms);
    text
}

fn cmd_fuzz(
    trials: usize,
    n_min: usize,
    n_max: usize,
    suite: fuzz::Suite,
    replay: Option<&Path>,
    seed: u64,
) -> Result<Output, CliError> {
    if let Some(path) = replay {
        let recorded: fuzz::CampaignReport = load_json(path)?;
        let reproduced = fuzz::replay(&recorded)?;
        let mut text = fuzz_text(&reproduced);
        text.insert_str(0, "replay reproduced every verdict\n");
        return Ok(Output {
            json: serde_json::to_value(&reproduced).expect("report serializes"),
            text,
            exit: 0,
        });
    }
    let opts = fuzz::FuzzOptions { seed, trials, n_min, n_max, suite };
    let report = fuzz::run_campaign(&opts)?;
    let exit = if report.failures == 0 { 0 } else { 1 };
    Ok(Output {
        json: serde_json::to_value(&report).expect("report serializes"),
        text: fuzz_text(&report),
        exit,
    })
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let float = cli.float;
    match &cli.command {
        Command::Validate { file } => cmd_validate(file, float),
        Command::Extend { space, subset, partial } => cmd_extend(space, subset, partial, float),
        Command::Perturb { space, metric, mode, pair, epsilon } => {
            cmd_perturb(space, metric, *mode, pair.as_deref(), epsilon.as_deref(), float)
        }
        Command::Recover { space_x, space_y, oracle, budget, samples } => {
            cmd_recover(space_x, space_y, oracle, *budget, *samples, cli.seed)
        }
        Command::Fuzz { trials, n_min, n_max, suite, replay } => {
            cmd_fuzz(*trials, *n_min, *n_max, *suite, replay.as_deref(), cli.seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            match cli.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&output.json).expect("valid json"))
                }
                Format::Text => print!("{}", output.text),
            }
            ExitCode::from(output.exit)
        }
        Err(error) => {
            eprintln!("error: {}", error.message());
            ExitCode::from(error.exit_code())
        }
    }
}
