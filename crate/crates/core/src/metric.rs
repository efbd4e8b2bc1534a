//! The cone of pseudometrics on a finite index set.
//!
//! A pseudometric is stored as a dense symmetric matrix of exact rationals
//! with zero diagonal that satisfies the triangle inequality. Admissibility
//! (strict positivity off the diagonal) is the extra predicate separating
//! genuine metrics from pseudometrics. Points are identified by index;
//! labels are an IO concern and live in [`crate::space`].

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::scalar::{is_nonneg, Scalar};

/// An unordered pair of point indices, `lo <= hi`.
///
/// A pair with `lo == hi` is a singleton; a *doubleton* has `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UPair {
    lo: usize,
    hi: usize,
}

impl UPair {
    pub fn new(i: usize, j: usize) -> Self {
        if i <= j {
            UPair { lo: i, hi: j }
        } else {
            UPair { lo: j, hi: i }
        }
    }

    /// An unordered pair of two *distinct* indices; `None` when `i == j`.
    pub fn doubleton(i: usize, j: usize) -> Option<Self> {
        if i == j {
            None
        } else {
            Some(Self::new(i, j))
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn is_doubleton(&self) -> bool {
        self.lo < self.hi
    }

    pub fn contains(&self, p: usize) -> bool {
        self.lo == p || self.hi == p
    }

    /// The member other than `p`, if `p` is a member at all.
    pub fn other(&self, p: usize) -> Option<usize> {
        if p == self.lo {
            Some(self.hi)
        } else if p == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }

    /// Members as a set (one element for singletons, two for doubletons).
    pub fn members(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        s.insert(self.lo);
        s.insert(self.hi);
        s
    }
}

impl fmt::Display for UPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_doubleton() {
            write!(f, "{{{},{}}}", self.lo, self.hi)
        } else {
            write!(f, "{{{}}}", self.lo)
        }
    }
}

/// All doubletons of an `n`-point index set, in lexicographic order.
pub fn doubletons(n: usize) -> impl Iterator<Item = UPair> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| UPair { lo: i, hi: j }))
}

/// The first pseudometric axiom violated by a candidate matrix, with a
/// witness. Scan order is deterministic, so the same bad input always
/// produces the same report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricViolation {
    /// Row `row` has `len` entries where `expected` were required.
    NotSquare { row: usize, len: usize, expected: usize },
    Asymmetric { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    NegativeEntry { i: usize, j: usize },
    /// `d(i,k) > d(i,j) + d(j,k)`.
    TriangleViolation { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Self::Asymmetric { i, j } => write!(f, "asymmetric at ({i},{j})"),
            Self::NonzeroDiagonal { i } => write!(f, "nonzero diagonal at ({i},{i})"),
            Self::NegativeEntry { i, j } => write!(f, "negative entry at ({i},{j})"),
            Self::TriangleViolation { i, j, k } => {
                write!(f, "triangle violation: d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

impl core::error::Error for MetricViolation {}

/// Errors from cone operations on mismatched or out-of-domain arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricOpError {
    SizeMismatch { left: usize, right: usize },
    NegativeScale,
}

impl fmt::Display for MetricOpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SizeMismatch { left, right } => {
                write!(f, "point counts differ: {left} vs {right}")
            }
            Self::NegativeScale => write!(f, "scale factor must be nonnegative"),
        }
    }
}

impl core::error::Error for MetricOpError {}

/// A pseudometric on `n` points: symmetric, nonnegative, zero diagonal,
/// triangle inequality. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pseudometric {
    n: usize,
    /// Row-major `n * n` matrix; symmetry is an invariant.
    entries: Vec<Scalar>,
}

impl Pseudometric {
    /// Validate a square matrix as a pseudometric.
    ///
    /// Checks, in order: squareness, symmetry, zero diagonal,
    /// nonnegativity, triangle inequality. The first violated axiom is
    /// reported together with a witness.
    pub fn from_matrix(rows: &[Vec<Scalar>]) -> Result<Self, MetricViolation> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricViolation::NotSquare { row, len: r.len(), expected: n });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(MetricViolation::Asymmetric { i, j });
                }
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if !r[i].is_zero() {
                return Err(MetricViolation::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if !is_nonneg(&rows[i][j]) {
                    return Err(MetricViolation::NegativeEntry { i, j });
                }
            }
        }
        for i in 0..n {
            for k in (i + 1)..n {
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = &rows[i][j] + &rows[j][k];
                    if rows[i][k] > via {
                        return Err(MetricViolation::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            entries.extend(r.iter().cloned());
        }
        Ok(Pseudometric { n, entries })
    }

    /// Build from a value function on index pairs, then validate.
    pub fn from_fn(
        n: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Result<Self, MetricViolation> {
        let rows: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Scalar::zero() } else if i < j { f(i, j) } else { f(j, i) })
                    .collect()
            })
            .collect();
        Self::from_matrix(&rows)
    }

    /// The zero pseudometric on `n` points.
    pub fn zero(n: usize) -> Self {
        Pseudometric { n, entries: vec![Scalar::zero(); n * n] }
    }

    /// Invariant-preserving internal constructor. `entries` must already be
    /// a valid symmetric pseudometric matrix.
    pub(crate) fn from_raw_unchecked(n: usize, entries: Vec<Scalar>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Pseudometric { n, entries }
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.n + j]
    }

    /// Value at an unordered pair (zero on singletons).
    pub fn at(&self, pair: UPair) -> &Scalar {
        self.get(pair.lo(), pair.hi())
    }

    /// The matrix as rows, for serialization.
    pub fn rows(&self) -> Vec<Vec<Scalar>> {
        crate::scalar::matrix_to_rows(self.n, &self.entries)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// Sup-norm: the maximum entry (zero on spaces with fewer than two
    /// points).
    pub fn norm(&self) -> Scalar {
        let mut best = Scalar::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                if *v > best {
                    best = v.clone();
                }
            }
        }
        best
    }

    /// Entrywise sum. The cone is closed under addition, and the sum with
    /// an admissible metric is admissible.
    pub fn add(&self, other: &Pseudometric) -> Result<Pseudometric, MetricOpError> {
        if self.n != other.n {
            return Err(MetricOpError::SizeMismatch { left: self.n, right: other.n });
        }
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(Pseudometric { n: self.n, entries })
    }

    /// Entrywise scaling by a nonnegative factor; `||c*d|| = c*||d||`.
    pub fn scale(&self, c: &Scalar) -> Result<Pseudometric, MetricOpError> {
        if !is_nonneg(c) {
            return Err(MetricOpError::NegativeScale);
        }
        let entries = self.entries.iter().map(|a| a * c).collect();
        Ok(Pseudometric { n: self.n, entries })
    }

    /// Sup-distance `max |d(i,j) - e(i,j)|`; the metric induced by the
    /// sup-norm on the cone.
    pub fn sup_distance(&self, other: &Pseudometric) -> Result<Scalar, MetricOpError> {
        if self.n != other.n {
            return Err(MetricOpError::SizeMismatch { left: self.n, right: other.n });
        }
        let mut best = Scalar::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let mut diff = self.get(i, j) - other.get(i, j);
                if diff < Scalar::zero() {
                    diff = -diff;
                }
                if diff > best {
                    best = diff;
                }
            }
        }
        Ok(best)
    }

    /// The set of unordered pairs attaining the sup-norm.
    ///
    /// When the norm is positive only doubletons can attain it. The zero
    /// pseudometric attains its norm on every singleton, so by convention
    /// its peak set is the set of all singletons.
    pub fn peak_set(&self) -> PeakSet {
        let norm = self.norm();
        let mut pairs = BTreeSet::new();
        if norm.is_zero() {
            for i in 0..self.n {
                pairs.insert(UPair::new(i, i));
            }
        } else {
            for i in 0..self.n {
                for j in (i + 1)..self.n {
                    if *self.get(i, j) == norm {
                        pairs.insert(UPair::new(i, j));
                    }
                }
            }
        }
        PeakSet { pairs }
    }

    /// Strict positivity off the diagonal: the pseudometric is a genuine
    /// (admissible) metric.
    pub fn is_admissible(&self) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Unique-peak class membership: admissible and the norm is attained at
    /// exactly one doubleton.
    pub fn in_pp(&self) -> bool {
        self.is_admissible()
            && self
                .peak_set()
                .single()
                .is_some_and(|p| p.is_doubleton())
    }

    /// Compact-peak class membership. On a finite space every admissible
    /// metric qualifies, with the whole point set as compact witness;
    /// non-admissible pseudometrics are excluded. Returns the witness.
    pub fn in_pc(&self) -> Option<Vec<usize>> {
        if self.is_admissible() {
            Some((0..self.n).collect())
        } else {
            None
        }
    }

    /// Open or closed ball around `z`: the sublevel set of the distance row.
    pub fn ball(&self, z: usize, r: &Scalar, closed: bool) -> Vec<usize> {
        (0..self.n)
            .filter(|&w| {
                let d = self.get(z, w);
                if closed {
                    d <= r
                } else {
                    d < r
                }
            })
            .collect()
    }

    /// Least positive entry; `None` when the pseudometric is zero
    /// everywhere or the space has fewer than two points.
    pub fn min_positive_distance(&self) -> Option<Scalar> {
        let mut best: Option<&Scalar> = None;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                if !v.is_zero() && best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
        best.cloned()
    }
}

/// Validate a square scalar matrix as a pseudometric.
pub fn validate_pseudometric(rows: &[Vec<Scalar>]) -> Result<Pseudometric, MetricViolation> {
    Pseudometric::from_matrix(rows)
}

/// The argmax set of a pseudometric over unordered pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeakSet {
    pairs: BTreeSet<UPair>,
}

impl PeakSet {
    pub fn from_pairs(pairs: BTreeSet<UPair>) -> Self {
        PeakSet { pairs }
    }

    pub fn pairs(&self) -> &BTreeSet<UPair> {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &UPair> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &UPair) -> bool {
        self.pairs.contains(pair)
    }

    /// The unique member, if there is exactly one.
    pub fn single(&self) -> Option<UPair> {
        if self.pairs.len() == 1 {
            self.pairs.iter().next().copied()
        } else {
            None
        }
    }

    pub fn intersect(&self, other: &PeakSet) -> PeakSet {
        PeakSet { pairs: self.pairs.intersection(&other.pairs).copied().collect() }
    }
}

impl fmt::Display for PeakSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, p) in self.pairs.iter().enumerate() {
            if idx > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int};
    use crate::testutil::{arb_admissible, arb_pseudometric, pm3, rows3};
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn zero_matrix_is_a_pseudometric() {
        let rows = vec![vec![int(0); 3]; 3];
        let d = Pseudometric::from_matrix(&rows).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn path_metric_on_three_points_is_valid() {
        assert!(Pseudometric::from_matrix(&rows3(1, 2, 1)).is_ok());
    }

    #[test]
    fn triangle_violation_reports_first_witness_triple() {
        let err = Pseudometric::from_matrix(&rows3(1, 3, 1)).unwrap_err();
        assert_eq!(err, MetricViolation::TriangleViolation { i: 0, j: 1, k: 2 });
    }

    #[test]
    fn violations_are_reported_distinctly() {
        let not_square = vec![vec![int(0), int(1)], vec![int(1)]];
        assert_eq!(
            Pseudometric::from_matrix(&not_square).unwrap_err(),
            MetricViolation::NotSquare { row: 1, len: 1, expected: 2 }
        );

        let asym = vec![vec![int(0), int(1)], vec![int(2), int(0)]];
        assert_eq!(
            Pseudometric::from_matrix(&asym).unwrap_err(),
            MetricViolation::Asymmetric { i: 0, j: 1 }
        );

        let diag = vec![vec![int(1), int(1)], vec![int(1), int(0)]];
        assert_eq!(
            Pseudometric::from_matrix(&diag).unwrap_err(),
            MetricViolation::NonzeroDiagonal { i: 0 }
        );

        let neg = vec![vec![int(0), int(-1)], vec![int(-1), int(0)]];
        assert_eq!(
            Pseudometric::from_matrix(&neg).unwrap_err(),
            MetricViolation::NegativeEntry { i: 0, j: 1 }
        );
    }

    #[test]
    fn norm_examples() {
        assert_eq!(Pseudometric::zero(3).norm(), int(0));
        let d = pm3(1, 2, 1);
        assert_eq!(d.norm(), int(2));
        assert_eq!(d.add(&d).unwrap().norm(), int(4));
    }

    #[test]
    fn cone_add_identity_and_doubling() {
        let d = pm3(1, 2, 1);
        assert_eq!(d.add(&Pseudometric::zero(3)).unwrap(), d);
        let double = d.add(&d).unwrap();
        assert_eq!(*double.get(0, 2), int(4));
        assert!(matches!(
            d.add(&Pseudometric::zero(4)).unwrap_err(),
            MetricOpError::SizeMismatch { .. }
        ));
    }

    #[test]
    fn adding_an_admissible_metric_makes_the_sum_admissible() {
        // A pseudometric with a vanishing off-diagonal entry plus an
        // admissible one.
        let degenerate = pm3(0, 1, 1);
        assert!(!degenerate.is_admissible());
        let ambient = pm3(1, 1, 1);
        assert!(degenerate.add(&ambient).unwrap().is_admissible());
    }

    #[test]
    fn cone_scale_examples() {
        let d = pm3(1, 2, 1);
        assert!(d.scale(&int(0)).unwrap().is_zero());
        assert_eq!(d.scale(&int(1)).unwrap(), d);
        assert_eq!(d.scale(&frac(1, 2)).unwrap().norm(), int(1));
        assert_eq!(d.scale(&int(-1)).unwrap_err(), MetricOpError::NegativeScale);
    }

    #[test]
    fn sup_distance_examples() {
        let d = pm3(1, 2, 1);
        assert_eq!(d.sup_distance(&d).unwrap(), int(0));
        assert_eq!(d.sup_distance(&Pseudometric::zero(3)).unwrap(), d.norm());
        assert_eq!(d.sup_distance(&pm3(1, 1, 1)).unwrap(), int(1));
    }

    #[test]
    fn peak_set_unique_tie_and_zero() {
        assert_eq!(pm3(1, 2, 1).peak_set().single(), Some(UPair::new(0, 2)));

        let tie = pm3(2, 2, 1);
        let pairs: Vec<UPair> = tie.peak_set().iter().copied().collect();
        assert_eq!(pairs, vec![UPair::new(0, 1), UPair::new(0, 2)]);

        let singles: Vec<UPair> = Pseudometric::zero(3).peak_set().iter().copied().collect();
        assert_eq!(singles, vec![UPair::new(0, 0), UPair::new(1, 1), UPair::new(2, 2)]);
    }

    #[test]
    fn unique_peak_membership() {
        assert!(pm3(1, 2, 1).in_pp());
        assert!(!pm3(2, 2, 1).in_pp());
        assert!(!Pseudometric::zero(3).in_pp());
    }

    #[test]
    fn compact_peak_membership_with_witness() {
        let d = pm3(1, 2, 1);
        assert_eq!(d.in_pc(), Some(vec![0, 1, 2]));
        assert_eq!(pm3(0, 1, 1).in_pc(), None);
        assert_eq!(Pseudometric::zero(2).in_pc(), None);
    }

    #[test]
    fn ball_examples() {
        let d = pm3(1, 2, 1);
        assert_eq!(d.ball(0, &int(0), true), vec![0]);
        let beyond = d.norm() + int(1);
        assert_eq!(d.ball(0, &beyond, false), vec![0, 1, 2]);
        assert_eq!(d.ball(0, &frac(3, 2), false), vec![0, 1]);
    }

    #[test]
    fn upair_normalizes_and_classifies() {
        assert_eq!(UPair::new(3, 1), UPair::new(1, 3));
        assert!(UPair::new(1, 3).is_doubleton());
        assert!(!UPair::new(2, 2).is_doubleton());
        assert_eq!(UPair::doubleton(2, 2), None);
        assert_eq!(UPair::new(1, 3).other(3), Some(1));
        assert_eq!(UPair::new(1, 3).other(0), None);
        assert_eq!(doubletons(3).count(), 3);
    }

    /// Independent argmax scan used as the oracle for `peak_set`.
    fn brute_force_peaks(d: &Pseudometric) -> BTreeSet<UPair> {
        let n = d.point_count();
        let mut best: Option<Scalar> = None;
        for i in 0..n {
            for j in i..n {
                let v = d.get(i, j).clone();
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
        let best = best.unwrap();
        let mut out = BTreeSet::new();
        for i in 0..n {
            for j in i..n {
                if *d.get(i, j) == best && (i != j || best.is_zero()) {
                    out.insert(UPair::new(i, j));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn cone_operations_preserve_validity(
            d in arb_pseudometric(5),
            e in arb_pseudometric(5),
            c in 0i64..9,
        ) {
            let sum = d.add(&e).unwrap();
            prop_assert!(Pseudometric::from_matrix(&sum.rows()).is_ok());
            let scaled = d.scale(&frac(c, 2)).unwrap();
            prop_assert!(Pseudometric::from_matrix(&scaled.rows()).is_ok());
        }

        #[test]
        fn sum_with_admissible_is_admissible(
            d in arb_pseudometric(5),
            e in arb_admissible(5),
        ) {
            prop_assert!(d.add(&e).unwrap().is_admissible());
        }

        #[test]
        fn norm_is_subadditive_and_homogeneous(
            d in arb_pseudometric(4),
            e in arb_pseudometric(4),
            c in 0i64..9,
        ) {
            let sum = d.add(&e).unwrap();
            prop_assert!(sum.norm() <= d.norm() + e.norm());
            let c = frac(c, 2);
            prop_assert_eq!(d.scale(&c).unwrap().norm(), &c * d.norm());
        }

        #[test]
        fn sup_distance_is_a_metric(
            d in arb_pseudometric(4),
            e in arb_pseudometric(4),
            f in arb_pseudometric(4),
        ) {
            let de = d.sup_distance(&e).unwrap();
            prop_assert_eq!(&de, &e.sup_distance(&d).unwrap());
            prop_assert_eq!(d.sup_distance(&d).unwrap(), int(0));
            prop_assert!(de <= d.sup_distance(&f).unwrap() + f.sup_distance(&e).unwrap());
        }

        #[test]
        fn peak_set_matches_brute_force(d in arb_pseudometric(6)) {
            let peaks = d.peak_set();
            prop_assert_eq!(peaks.pairs(), &brute_force_peaks(&d));
        }

        #[test]
        fn unique_peak_dominates_strictly(d in arb_admissible(5)) {
            if d.in_pp() {
                let peak = d.peak_set().single().unwrap();
                let top = d.at(peak).clone();
                for i in 0..5 {
                    for j in (i + 1)..5 {
                        if UPair::new(i, j) != peak {
                            prop_assert!(*d.get(i, j) < top);
                        }
                    }
                }
            }
        }

        #[test]
        fn balls_are_monotone(
            d in arb_pseudometric(5),
            r1 in 0i64..20,
            r2 in 0i64..20,
            z in 0usize..5,
        ) {
            let (lo, hi) = (frac(r1.min(r2), 2), frac(r1.max(r2), 2));
            let small = d.ball(z, &lo, false);
            let large = d.ball(z, &hi, false);
            prop_assert!(small.iter().all(|p| large.contains(p)));
            let open = d.ball(z, &lo, false);
            let closed = d.ball(z, &lo, true);
            prop_assert!(open.iter().all(|p| closed.contains(p)));
        }
    }
}
