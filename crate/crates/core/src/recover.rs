//! Recovery of the point bijection behind a metric-map oracle.
//!
//! Given a black-box map `T` from pseudometrics on `X` to pseudometrics on
//! `Y`, the engine checks the testable consequences of `T` being a
//! surjective isometry that respects the unique-peak class, then
//! reconstructs the pair bijection and the point bijection behind it and
//! verifies the canonical formula `T(d)(z,w) = d(phi(z),phi(w))` on
//! samples.
//!
//! Surjectivity itself is not decidable from finitely many evaluations;
//! the engine validates its checkable consequences (zero and norm
//! preservation, nonempty peak-set intersections) and reports hypothesis
//! violations instead of asserting the hypothesis.
//!
//! For each domain doubleton, metrics peaking uniquely at it are generated
//! and the peak sets of their images are intersected until a single
//! codomain doubleton survives; for canonical oracles the first image
//! already has a unique peak, so one evaluation suffices. Point recovery
//! then intersects pair images over a common point; with fewer than three
//! points the bijection is genuinely ambiguous and is flagged as such.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::gen;
use crate::metric::{doubletons, PeakSet, Pseudometric, UPair};
use crate::peaks::{peaking_metric_at, PeaksError};
use crate::scalar::{int, Scalar};
use crate::space::FiniteSpace;

/// A black-box evaluable map from pseudometrics on the domain space to
/// pseudometrics on the codomain space. Evaluation must be pure and
/// deterministic; the `Pseudometric` type guarantees outputs are valid.
pub trait MetricOracle {
    fn domain(&self) -> &FiniteSpace;
    fn codomain(&self) -> &FiniteSpace;
    fn eval(&self, d: &Pseudometric) -> Pseudometric;

    /// Inverse evaluation for oracles constructed with an explicit
    /// inverse; `None` otherwise. Inverse-dependent checks are skipped
    /// when unavailable.
    fn inverse_eval(&self, rho: &Pseudometric) -> Option<Pseudometric> {
        let _ = rho;
        None
    }
}

impl<T: MetricOracle + ?Sized> MetricOracle for Box<T> {
    fn domain(&self) -> &FiniteSpace {
        (**self).domain()
    }

    fn codomain(&self) -> &FiniteSpace {
        (**self).codomain()
    }

    fn eval(&self, d: &Pseudometric) -> Pseudometric {
        (**self).eval(d)
    }

    fn inverse_eval(&self, rho: &Pseudometric) -> Option<Pseudometric> {
        (**self).inverse_eval(rho)
    }
}

/// Whether a recovered point map is the only candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    /// On two-point spaces both bijections satisfy the canonical formula;
    /// the lexicographically first one is returned.
    AmbiguousCard2,
}

/// A bijection from codomain points to domain points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    map: Vec<usize>,
    uniqueness: Uniqueness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointMapError {
    NotAPermutation,
}

impl fmt::Display for PointMapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "map is not a permutation of the point indices")
    }
}

impl core::error::Error for PointMapError {}

impl PointMap {
    /// A bijection given as `map[y] = x`; must be a permutation.
    pub fn bijection(map: Vec<usize>, uniqueness: Uniqueness) -> Result<Self, PointMapError> {
        let n = map.len();
        let mut seen = alloc::vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(PointMapError::NotAPermutation);
            }
            seen[x] = true;
        }
        Ok(PointMap { map, uniqueness })
    }

    pub fn identity(n: usize) -> Self {
        PointMap { map: (0..n).collect(), uniqueness: Uniqueness::Unique }
    }

    pub fn apply(&self, y: usize) -> usize {
        self.map[y]
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn uniqueness(&self) -> Uniqueness {
        self.uniqueness
    }

    pub fn inverse(&self) -> PointMap {
        let mut inv = alloc::vec![0usize; self.map.len()];
        for (y, &x) in self.map.iter().enumerate() {
            inv[x] = y;
        }
        PointMap { map: inv, uniqueness: self.uniqueness }
    }

    /// Image of an unordered pair of codomain indices.
    pub fn apply_pair(&self, p: UPair) -> UPair {
        UPair::new(self.apply(p.lo()), self.apply(p.hi()))
    }
}

/// A total injective map from codomain doubletons to domain doubletons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairMap {
    domain_points: usize,
    codomain_points: usize,
    map: BTreeMap<UPair, UPair>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairMapError {
    KeyNotDoubleton(UPair),
    ValueNotDoubleton(UPair),
    KeyOutOfRange(UPair),
    ValueOutOfRange(UPair),
    MissingKey(UPair),
    NotInjective { first: UPair, second: UPair, image: UPair },
}

impl fmt::Display for PairMapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KeyNotDoubleton(p) => write!(f, "key {p} is not a doubleton"),
            Self::ValueNotDoubleton(p) => write!(f, "value {p} is not a doubleton"),
            Self::KeyOutOfRange(p) => write!(f, "key {p} out of range"),
            Self::ValueOutOfRange(p) => write!(f, "value {p} out of range"),
            Self::MissingKey(p) => write!(f, "no image assigned to {p}"),
            Self::NotInjective { first, second, image } => {
                write!(f, "{first} and {second} both map to {image}")
            }
        }
    }
}

impl core::error::Error for PairMapError {}

impl PairMap {
    /// `map` sends doubletons of the codomain (`codomain_points` indices)
    /// to doubletons of the domain; it must be total and injective.
    pub fn new(
        domain_points: usize,
        codomain_points: usize,
        map: BTreeMap<UPair, UPair>,
    ) -> Result<Self, PairMapError> {
        let mut images: BTreeMap<UPair, UPair> = BTreeMap::new();
        for (k, v) in &map {
            if !k.is_doubleton() {
                return Err(PairMapError::KeyNotDoubleton(*k));
            }
            if !v.is_doubleton() {
                return Err(PairMapError::ValueNotDoubleton(*v));
            }
            if k.hi() >= codomain_points {
                return Err(PairMapError::KeyOutOfRange(*k));
            }
            if v.hi() >= domain_points {
                return Err(PairMapError::ValueOutOfRange(*v));
            }
            if let Some(prev) = images.insert(*v, *k) {
                return Err(PairMapError::NotInjective { first: prev, second: *k, image: *v });
            }
        }
        for k in doubletons(codomain_points) {
            if !map.contains_key(&k) {
                return Err(PairMapError::MissingKey(k));
            }
        }
        Ok(PairMap { domain_points, codomain_points, map })
    }

    pub fn domain_points(&self) -> usize {
        self.domain_points
    }

    pub fn codomain_points(&self) -> usize {
        self.codomain_points
    }

    pub fn apply(&self, p: UPair) -> Option<UPair> {
        self.map.get(&p).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UPair, &UPair)> {
        self.map.iter()
    }
}

// ---------------------------------------------------------------------------
// Stage reports
// ---------------------------------------------------------------------------

/// A sample pair whose sup-distance is not preserved.
#[derive(Clone, Debug)]
pub struct IsometryCounterexample {
    pub left: Pseudometric,
    pub right: Pseudometric,
    pub input_distance: Scalar,
    pub output_distance: Scalar,
}

#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub pairs_checked: usize,
    pub counterexample: Option<IsometryCounterexample>,
}

impl IsometryReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, Debug)]
pub enum ZeroFailure {
    /// The image of the zero pseudometric is nonzero.
    ZeroNotFixed { image: Pseudometric },
    /// The inverse image of the zero pseudometric is nonzero.
    InverseZeroNotFixed { image: Pseudometric },
    /// Some ladder sample changed norm.
    NormChanged { sample: Pseudometric, input_norm: Scalar, output_norm: Scalar },
}

#[derive(Clone, Debug)]
pub struct ZeroPreservationReport {
    pub ladder_size: usize,
    /// Whether the oracle exposed an inverse for the inverse-side check.
    pub inverse_checked: bool,
    pub failure: Option<ZeroFailure>,
}

impl ZeroPreservationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Clone, Debug)]
pub enum PairRecoveryError {
    SpaceTooSmall { points: usize },
    /// The oracle returned a pseudometric on the wrong number of points.
    WrongOutputSize { got: usize, expected: usize },
    /// The running intersection of image peak sets became empty: the
    /// oracle violates the finite-intersection consequence of being a
    /// canonical isometry.
    EmptyIntersection { pair: UPair },
    /// The intersection never shrank to a single doubleton within the
    /// generation budget; the oracle likely does not preserve the
    /// unique-peak class.
    BudgetExhausted { pair: UPair, remaining: usize },
    /// The intersection collapsed to a singleton point pair, which can
    /// only happen if image norms degenerate to zero.
    DegeneratePeak { pair: UPair },
    /// Two domain doubletons were assigned the same codomain doubleton.
    NonInjective { first: UPair, second: UPair, image: UPair },
    /// Pair recovery succeeded pointwise but the spaces have different
    /// cardinalities, so no pair bijection exists.
    CardinalityMismatch { domain: usize, codomain: usize },
    /// Peaking-metric generation failed (invalid inputs).
    Peaks(PeaksError),
}

impl fmt::Display for PairRecoveryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SpaceTooSmall { points } => {
                write!(f, "need at least two points, space has {points}")
            }
            Self::WrongOutputSize { got, expected } => {
                write!(f, "oracle output on {got} points, codomain has {expected}")
            }
            Self::EmptyIntersection { pair } => {
                write!(f, "image peak sets for {pair} have empty intersection")
            }
            Self::BudgetExhausted { pair, remaining } => write!(
                f,
                "intersection for {pair} still has {remaining} candidates after budget"
            ),
            Self::DegeneratePeak { pair } => {
                write!(f, "image peak set for {pair} degenerated to a singleton point")
            }
            Self::NonInjective { first, second, image } => {
                write!(f, "{first} and {second} both assigned to {image}")
            }
            Self::CardinalityMismatch { domain, codomain } => {
                write!(f, "domain has {domain} points but codomain has {codomain}")
            }
            Self::Peaks(e) => write!(f, "peaking metric generation failed: {e}"),
        }
    }
}

impl core::error::Error for PairRecoveryError {}

impl From<PeaksError> for PairRecoveryError {
    fn from(e: PeaksError) -> Self {
        PairRecoveryError::Peaks(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointRecoveryError {
    TooFewPoints { points: usize },
    CardinalityMismatch { domain: usize, codomain: usize },
    /// The intersection of pair images over a common point is not a
    /// singleton: the pair map is not induced by any point bijection.
    NonSingletonIntersection { point: usize, size: usize },
    NonBijective { collision: usize },
    /// Defensive check of the identity `Phi({y,z}) = {phi(y),phi(z)}`.
    PairIdentityMismatch { pair: UPair },
}

impl fmt::Display for PointRecoveryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewPoints { points } => {
                write!(f, "need at least two points, got {points}")
            }
            Self::CardinalityMismatch { domain, codomain } => {
                write!(f, "domain has {domain} points but codomain has {codomain}")
            }
            Self::NonSingletonIntersection { point, size } => write!(
                f,
                "pair images over point {point} intersect in {size} points, expected one"
            ),
            Self::NonBijective { collision } => {
                write!(f, "two points map to domain point {collision}")
            }
            Self::PairIdentityMismatch { pair } => {
                write!(f, "pair map disagrees with the point map at {pair}")
            }
        }
    }
}

impl core::error::Error for PointRecoveryError {}

#[derive(Clone, Debug)]
pub struct FormulaViolation {
    pub sample_index: usize,
    /// Codomain pair at which the formula fails.
    pub pair: UPair,
    pub image_value: Scalar,
    pub expected: Scalar,
}

#[derive(Clone, Debug)]
pub struct FormulaReport {
    pub samples_checked: usize,
    pub pairs_checked: usize,
    pub violations: Vec<FormulaViolation>,
}

impl FormulaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    SizeMismatch { map: usize, codomain: usize, domain: usize },
    PointMapInvalid(PointMapError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SizeMismatch { map, codomain, domain } => write!(
                f,
                "point map on {map} points, codomain has {codomain}, domain has {domain}"
            ),
            Self::PointMapInvalid(e) => write!(f, "point map invalid: {e}"),
        }
    }
}

impl core::error::Error for OracleError {}

/// The canonical oracle induced by a bijection `phi` from codomain points
/// to domain points: `eval(d)(z,w) = d(phi(z), phi(w))`. It is a surjective
/// isometry carrying the admissible, compact-peak and unique-peak classes
/// of the domain onto those of the codomain.
#[derive(Clone, Debug)]
pub struct InducedOracle {
    domain: FiniteSpace,
    codomain: FiniteSpace,
    phi: PointMap,
}

impl InducedOracle {
    pub fn new(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        phi: PointMap,
    ) -> Result<Self, OracleError> {
        if phi.len() != codomain.point_count() || domain.point_count() != codomain.point_count() {
            return Err(OracleError::SizeMismatch {
                map: phi.len(),
                codomain: codomain.point_count(),
                domain: domain.point_count(),
            });
        }
        Ok(InducedOracle { domain, codomain, phi })
    }

    pub fn phi(&self) -> &PointMap {
        &self.phi
    }
}

impl MetricOracle for InducedOracle {
    fn domain(&self) -> &FiniteSpace {
        &self.domain
    }

    fn codomain(&self) -> &FiniteSpace {
        &self.codomain
    }

    fn eval(&self, d: &Pseudometric) -> Pseudometric {
        let n = self.codomain.point_count();
        let entries = (0..n * n)
            .map(|idx| d.get(self.phi.apply(idx / n), self.phi.apply(idx % n)).clone())
            .collect();
        Pseudometric::from_raw_unchecked(n, entries)
    }

    fn inverse_eval(&self, rho: &Pseudometric) -> Option<Pseudometric> {
        let inv = self.phi.inverse();
        let n = self.domain.point_count();
        let entries = (0..n * n)
            .map(|idx| rho.get(inv.apply(idx / n), inv.apply(idx % n)).clone())
            .collect();
        Some(Pseudometric::from_raw_unchecked(n, entries))
    }
}

/// Build the canonical oracle for a point bijection.
pub fn induced_oracle(
    domain: FiniteSpace,
    codomain: FiniteSpace,
    phi: PointMap,
) -> Result<InducedOracle, OracleError> {
    InducedOracle::new(domain, codomain, phi)
}

type EvalFn = dyn Fn(&Pseudometric) -> Pseudometric + Send + Sync;

/// An oracle defined by an arbitrary closure; the test double for
/// non-canonical maps (translations, scalings, compositions).
pub struct FnOracle {
    domain: FiniteSpace,
    codomain: FiniteSpace,
    f: Box<EvalFn>,
}

impl FnOracle {
    pub fn new(
        domain: FiniteSpace,
        codomain: FiniteSpace,
        f: impl Fn(&Pseudometric) -> Pseudometric + Send + Sync + 'static,
    ) -> Self {
        FnOracle { domain, codomain, f: Box::new(f) }
    }
}

impl MetricOracle for FnOracle {
    fn domain(&self) -> &FiniteSpace {
        &self.domain
    }

    fn codomain(&self) -> &FiniteSpace {
        &self.codomain
    }

    fn eval(&self, d: &Pseudometric) -> Pseudometric {
        (self.f)(d)
    }
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Check exact sup-distance preservation on the given sample pairs.
pub fn check_isometry(
    oracle: &dyn MetricOracle,
    samples: &[(Pseudometric, Pseudometric)],
) -> IsometryReport {
    for (left, right) in samples {
        let input_distance = left.sup_distance(right).expect("samples on the domain");
        let output_distance = oracle
            .eval(left)
            .sup_distance(&oracle.eval(right))
            .expect("oracle outputs on the codomain");
        if input_distance != output_distance {
            return IsometryReport {
                pairs_checked: samples.len(),
                counterexample: Some(IsometryCounterexample {
                    left: left.clone(),
                    right: right.clone(),
                    input_distance,
                    output_distance,
                }),
            };
        }
    }
    IsometryReport { pairs_checked: samples.len(), counterexample: None }
}

/// Check that the zero pseudometric is fixed and that norms are preserved
/// on a seeded ladder of samples (the ambient metric and random admissible
/// metrics rescaled to norms 1, 2 and 4). When the oracle exposes an
/// inverse, the inverse is checked on zero as well; otherwise that half is
/// skipped and reported as unchecked.
pub fn check_zero_preserved(oracle: &dyn MetricOracle, seed: u64) -> ZeroPreservationReport {
    let nx = oracle.domain().point_count();
    let zero_x = Pseudometric::zero(nx);
    let image = oracle.eval(&zero_x);
    if !image.is_zero() {
        return ZeroPreservationReport {
            ladder_size: 0,
            inverse_checked: false,
            failure: Some(ZeroFailure::ZeroNotFixed { image }),
        };
    }
    let zero_y = Pseudometric::zero(oracle.codomain().point_count());
    let inverse_image = oracle.inverse_eval(&zero_y);
    let inverse_checked = inverse_image.is_some();
    if let Some(pre) = inverse_image {
        if !pre.is_zero() {
            return ZeroPreservationReport {
                ladder_size: 0,
                inverse_checked,
                failure: Some(ZeroFailure::InverseZeroNotFixed { image: pre }),
            };
        }
    }
    let mut rng = gen::seeded(seed);
    let mut ladder: Vec<Pseudometric> = alloc::vec![oracle.domain().ambient().clone()];
    for target in [int(1), int(2), int(4)] {
        let d = gen::random_admissible(nx, &mut rng);
        ladder.push(gen::with_norm(&d, &target).expect("admissible metrics have positive norm"));
    }
    let ladder_size = ladder.len();
    for sample in ladder {
        let input_norm = sample.norm();
        let output_norm = oracle.eval(&sample).norm();
        if input_norm != output_norm {
            return ZeroPreservationReport {
                ladder_size,
                inverse_checked,
                failure: Some(ZeroFailure::NormChanged { sample, input_norm, output_norm }),
            };
        }
    }
    ZeroPreservationReport { ladder_size, inverse_checked, failure: None }
}

/// Reconstruct the pair bijection from codomain doubletons to domain
/// doubletons by intersecting image peak sets of generated peaking metrics.
///
/// For each domain doubleton, metrics peaking uniquely at it are generated
/// with seeds `0..budget`; the running intersection of the image peak sets
/// must shrink to a single codomain doubleton. If the first image already
/// has a unique peak (as for canonical oracles), one evaluation suffices.
pub fn recover_pair_map(
    oracle: &dyn MetricOracle,
    budget: usize,
) -> Result<PairMap, PairRecoveryError> {
    let nx = oracle.domain().point_count();
    let ny = oracle.codomain().point_count();
    if nx < 2 {
        return Err(PairRecoveryError::SpaceTooSmall { points: nx });
    }
    if ny < 2 {
        return Err(PairRecoveryError::SpaceTooSmall { points: ny });
    }
    let mut assignments: BTreeMap<UPair, UPair> = BTreeMap::new();
    for xy in doubletons(nx) {
        let mut intersection: Option<PeakSet> = None;
        let mut resolved: Option<UPair> = None;
        for seed in 0..budget {
            let peaking = peaking_metric_at(oracle.domain(), xy, seed as u64)?;
            let image = oracle.eval(&peaking);
            if image.point_count() != ny {
                return Err(PairRecoveryError::WrongOutputSize {
                    got: image.point_count(),
                    expected: ny,
                });
            }
            let peaks = image.peak_set();
            let refined = match &intersection {
                None => peaks,
                Some(prev) => prev.intersect(&peaks),
            };
            if refined.is_empty() {
                return Err(PairRecoveryError::EmptyIntersection { pair: xy });
            }
            if let Some(single) = refined.single() {
                if !single.is_doubleton() {
                    return Err(PairRecoveryError::DegeneratePeak { pair: xy });
                }
                resolved = Some(single);
                break;
            }
            intersection = Some(refined);
        }
        let Some(zw) = resolved else {
            let remaining = intersection.map_or(0, |s| s.len());
            return Err(PairRecoveryError::BudgetExhausted { pair: xy, remaining });
        };
        if let Some(prev) = assignments.insert(zw, xy) {
            return Err(PairRecoveryError::NonInjective { first: prev, second: xy, image: zw });
        }
    }
    if nx != ny {
        return Err(PairRecoveryError::CardinalityMismatch { domain: nx, codomain: ny });
    }
    Ok(PairMap::new(nx, ny, assignments).expect("totality and injectivity hold by construction"))
}

/// Reconstruct the point bijection from a pair map by intersecting the
/// images of all doubletons through a common point.
///
/// On two-point spaces the bijection is genuinely ambiguous; the
/// lexicographically first one is returned, flagged.
pub fn recover_point_map(pair_map: &PairMap) -> Result<PointMap, PointRecoveryError> {
    let ny = pair_map.codomain_points();
    let nx = pair_map.domain_points();
    if ny < 2 {
        return Err(PointRecoveryError::TooFewPoints { points: ny });
    }
    if nx != ny {
        return Err(PointRecoveryError::CardinalityMismatch { domain: nx, codomain: ny });
    }
    if ny == 2 {
        return Ok(PointMap {
            map: alloc::vec![0, 1],
            uniqueness: Uniqueness::AmbiguousCard2,
        });
    }
    let mut map = Vec::with_capacity(ny);
    for y in 0..ny {
        let mut running: Option<BTreeSet<usize>> = None;
        for z in (0..ny).filter(|&z| z != y) {
            let image = pair_map
                .apply(UPair::new(y, z))
                .expect("pair maps are total")
                .members();
            running = Some(match running {
                None => image,
                Some(prev) => prev.intersection(&image).copied().collect(),
            });
        }
        let candidates = running.expect("at least two points");
        if candidates.len() != 1 {
            return Err(PointRecoveryError::NonSingletonIntersection {
                point: y,
                size: candidates.len(),
            });
        }
        map.push(*candidates.iter().next().expect("len checked"));
    }
    let mut seen = alloc::vec![false; nx];
    for &x in &map {
        if seen[x] {
            return Err(PointRecoveryError::NonBijective { collision: x });
        }
        seen[x] = true;
    }
    for yz in doubletons(ny) {
        let via_points = UPair::new(map[yz.lo()], map[yz.hi()]);
        if pair_map.apply(yz) != Some(via_points) {
            return Err(PointRecoveryError::PairIdentityMismatch { pair: yz });
        }
    }
    Ok(PointMap { map, uniqueness: Uniqueness::Unique })
}

/// Exact check of the canonical formula `T(d)(z,w) = d(phi(z),phi(w))` on
/// every codomain doubleton of every sample. All violations are reported.
pub fn verify_canonical_formula(
    oracle: &dyn MetricOracle,
    phi: &PointMap,
    samples: &[Pseudometric],
) -> FormulaReport {
    let ny = oracle.codomain().point_count();
    let mut violations = Vec::new();
    let mut pairs_checked = 0usize;
    for (sample_index, d) in samples.iter().enumerate() {
        let image = oracle.eval(d);
        for pair in doubletons(ny) {
            pairs_checked += 1;
            let image_value = image.at(pair).clone();
            let expected = d.get(phi.apply(pair.lo()), phi.apply(pair.hi())).clone();
            if image_value != expected {
                violations.push(FormulaViolation { sample_index, pair, image_value, expected });
            }
        }
    }
    FormulaReport { samples_checked: samples.len(), pairs_checked, violations }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryStage {
    /// Sup-distance preservation on sample pairs.
    Isometry,
    /// Zero is fixed and norms are preserved.
    ZeroPreservation,
    /// Pair bijection via peak-set intersection.
    PairRecovery,
    /// Point bijection via pair-image intersection.
    PointRecovery,
    /// The canonical formula on samples.
    CanonicalFormula,
}

impl fmt::Display for RecoveryStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Isometry => "isometry",
            Self::ZeroPreservation => "zero-preservation",
            Self::PairRecovery => "pair-recovery",
            Self::PointRecovery => "point-recovery",
            Self::CanonicalFormula => "canonical-formula",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Debug)]
pub enum StageFailure {
    Isometry(IsometryCounterexample),
    Zero(ZeroFailure),
    Pairs(PairRecoveryError),
    Points(PointRecoveryError),
    Formula(FormulaReport),
}

/// A recovery run that aborted, with the stage that failed and its
/// diagnostic payload.
#[derive(Clone, Debug)]
pub struct RecoveryFailure {
    pub stage: RecoveryStage,
    pub failure: StageFailure,
}

impl fmt::Display for RecoveryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "recovery failed at the {} stage", self.stage)
    }
}

/// A successful recovery with all stage reports.
#[derive(Clone, Debug)]
pub struct Recovered {
    pub point_map: PointMap,
    pub pair_map: PairMap,
    pub isometry: IsometryReport,
    pub zero: ZeroPreservationReport,
    pub formula: FormulaReport,
}

#[derive(Clone, Copy, Debug)]
pub struct RecoveryConfig {
    /// Peaking metrics generated per doubleton before giving up.
    pub budget: usize,
    /// Sample count for the isometry and formula stages.
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig { budget: 16, sample_count: 50, seed: 0 }
    }
}

/// The full pipeline: isometry check, zero/norm preservation, pair
/// recovery, point recovery, canonical-formula verification. Aborts at the
/// first failing stage with its diagnostic.
pub fn full_recovery(
    oracle: &dyn MetricOracle,
    config: &RecoveryConfig,
) -> Result<Recovered, RecoveryFailure> {
    let nx = oracle.domain().point_count();
    let mut rng = gen::seeded(config.seed);
    let mut pairs = Vec::with_capacity(config.sample_count + 1);
    // A (metric, zero) pair is always included: it catches any oracle that
    // rescales distances.
    pairs.push((oracle.domain().ambient().clone(), Pseudometric::zero(nx)));
    for _ in 0..config.sample_count {
        pairs.push((gen::random_pseudometric(nx, &mut rng), gen::random_pseudometric(nx, &mut rng)));
    }
    let isometry = check_isometry(oracle, &pairs);
    if let Some(ce) = &isometry.counterexample {
        return Err(RecoveryFailure {
            stage: RecoveryStage::Isometry,
            failure: StageFailure::Isometry(ce.clone()),
        });
    }

    let zero = check_zero_preserved(oracle, config.seed.wrapping_add(1));
    if let Some(failure) = &zero.failure {
        return Err(RecoveryFailure {
            stage: RecoveryStage::ZeroPreservation,
            failure: StageFailure::Zero(failure.clone()),
        });
    }

    let pair_map = recover_pair_map(oracle, config.budget).map_err(|e| RecoveryFailure {
        stage: RecoveryStage::PairRecovery,
        failure: StageFailure::Pairs(e),
    })?;

    let point_map = recover_point_map(&pair_map).map_err(|e| RecoveryFailure {
        stage: RecoveryStage::PointRecovery,
        failure: StageFailure::Points(e),
    })?;

    let mut samples = Vec::with_capacity(config.sample_count);
    let mut rng = gen::seeded(config.seed.wrapping_add(2));
    for _ in 0..config.sample_count {
        samples.push(gen::random_pseudometric(nx, &mut rng));
    }
    let formula = verify_canonical_formula(oracle, &point_map, &samples);
    if !formula.passed() {
        return Err(RecoveryFailure {
            stage: RecoveryStage::CanonicalFormula,
            failure: StageFailure::Formula(formula),
        });
    }

    Ok(Recovered { point_map, pair_map, isometry, zero, formula })
}

/// A pseudometric separating two candidate bijections: zero on the
/// `phi`-image of some codomain doubleton, one on its `phi_alt`-image.
/// `None` when the bijections agree. Realizes the uniqueness argument for
/// the canonical formula on spaces with more than two points.
pub fn separating_sample(
    domain: &FiniteSpace,
    phi: &PointMap,
    phi_alt: &PointMap,
) -> Option<Pseudometric> {
    let ny = phi.len();
    if ny != phi_alt.len() || ny < 3 {
        return None;
    }
    let x = (0..ny).find(|&y| phi.apply(y) != phi_alt.apply(y))?;
    let y = (0..ny)
        .find(|&y| y != x && phi.apply(y) != phi_alt.apply(x))
        .expect("three points leave room");
    let good = UPair::new(phi.apply(x), phi.apply(y));
    let bad = UPair::new(phi_alt.apply(x), phi_alt.apply(y));
    debug_assert_ne!(good, bad);
    // Unit distance from a point of `bad` outside `good` to everything
    // else, zero elsewhere: vanishes on `good`, is one on `bad`.
    let lone = if !good.contains(bad.lo()) { bad.lo() } else { bad.hi() };
    debug_assert!(!good.contains(lone));
    let n = domain.point_count();
    let entries = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            if (i == lone) != (j == lone) {
                int(1)
            } else {
                Scalar::zero()
            }
        })
        .collect();
    Some(Pseudometric::from_raw_unchecked(n, entries))
}
