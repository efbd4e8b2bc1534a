//! Norm-preserving extension of a pseudometric from a subset to the whole
//! space.
//!
//! The construction is concrete: rescale the ambient metric by the least
//! Lipschitz constant dominating the partial data, override the subset
//! pairs with their prescribed values, take the all-pairs shortest-path
//! closure of the resulting weight graph, and truncate at the norm of the
//! partial pseudometric. The closure restores the triangle inequality, the
//! Lipschitz bound keeps every prescribed value shortest, and truncation
//! pins the norm:
//!
//! * the extension agrees with the partial data entry for entry;
//! * its norm equals the norm of the partial data, exactly;
//! * the output is a valid pseudometric.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::metric::{MetricViolation, Pseudometric};
use crate::scalar::Scalar;
use crate::space::FiniteSpace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtendError {
    IndexOutOfRange { index: usize, points: usize },
    DuplicateIndex { index: usize },
    /// The restricted matrix is not a pseudometric on the subset.
    InvalidRestriction(MetricViolation),
    /// Value matrix has the wrong row count for the subset or block list.
    ValueShape { expected: usize, rows: usize },
    /// The block-value matrix is not a pseudometric on the block indices.
    InvalidBlockValues(MetricViolation),
    CapBelowValues { cap: Scalar, max_value: Scalar },
}

impl fmt::Display for ExtendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IndexOutOfRange { index, points } => {
                write!(f, "point index {index} out of range for a {points}-point space")
            }
            Self::DuplicateIndex { index } => write!(f, "point index {index} listed twice"),
            Self::InvalidRestriction(v) => write!(f, "restricted matrix invalid: {v}"),
            Self::ValueShape { expected, rows } => {
                write!(f, "expected a {expected}-row value matrix, got {rows} rows")
            }
            Self::InvalidBlockValues(v) => write!(f, "block values invalid: {v}"),
            Self::CapBelowValues { cap, max_value } => {
                write!(f, "cap {cap} is below the largest prescribed value {max_value}")
            }
        }
    }
}

impl core::error::Error for ExtendError {}

/// All-pairs shortest-path closure of a symmetric nonnegative weight matrix
/// with zero diagonal, in place. The result satisfies the triangle
/// inequality and never exceeds the input.
pub(crate) fn shortest_path_closure(n: usize, w: &mut [Scalar]) {
    debug_assert_eq!(w.len(), n * n);
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in (i + 1)..n {
                if j == k {
                    continue;
                }
                let via = &w[i * n + k] + &w[k * n + j];
                if w[i * n + j] > via {
                    w[i * n + j] = via.clone();
                    w[j * n + i] = via;
                }
            }
        }
    }
}

/// A pseudometric prescribed on a subset `A` of a finite space's points.
#[derive(Clone, Debug)]
pub struct PartialPseudometric<'a> {
    space: &'a FiniteSpace,
    /// Subset as a list of point indices; `values` is indexed by position
    /// in this list.
    subset: Vec<usize>,
    values: Pseudometric,
}

impl<'a> PartialPseudometric<'a> {
    /// `values[p][q]` prescribes the distance between `subset[p]` and
    /// `subset[q]`; it must be a valid pseudometric on `subset.len()`
    /// virtual points.
    pub fn new(
        space: &'a FiniteSpace,
        subset: &[usize],
        values: &[Vec<Scalar>],
    ) -> Result<Self, ExtendError> {
        let n = space.point_count();
        let mut seen = BTreeSet::new();
        for &a in subset {
            if a >= n {
                return Err(ExtendError::IndexOutOfRange { index: a, points: n });
            }
            if !seen.insert(a) {
                return Err(ExtendError::DuplicateIndex { index: a });
            }
        }
        if values.len() != subset.len() {
            return Err(ExtendError::ValueShape { expected: subset.len(), rows: values.len() });
        }
        let values =
            Pseudometric::from_matrix(values).map_err(ExtendError::InvalidRestriction)?;
        Ok(PartialPseudometric { space, subset: subset.to_vec(), values })
    }

    pub fn space(&self) -> &FiniteSpace {
        self.space
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn values(&self) -> &Pseudometric {
        &self.values
    }

    /// Norm of the prescribed data.
    pub fn norm(&self) -> Scalar {
        self.values.norm()
    }

    /// Least `L` with `d(a,b) <= L * ambient(a,b)` over all subset pairs;
    /// zero when the subset has at most one point.
    pub fn lipschitz_constant(&self) -> Scalar {
        let amb = self.space.ambient();
        let mut best = Scalar::zero();
        for p in 0..self.subset.len() {
            for q in (p + 1)..self.subset.len() {
                // Ambient entries are strictly positive off the diagonal.
                let ratio = self.values.get(p, q) / amb.get(self.subset[p], self.subset[q]);
                if ratio > best {
                    best = ratio;
                }
            }
        }
        best
    }

    /// Extend to the whole space: restriction-exact and norm-preserving.
    pub fn extend(&self) -> Pseudometric {
        let n = self.space.point_count();
        let cap = self.norm();
        if cap.is_zero() {
            // Covers empty and one-point subsets too; the norm contract
            // forces the zero pseudometric.
            return Pseudometric::zero(n);
        }
        let lip = self.lipschitz_constant();
        let amb = self.space.ambient();
        let mut w: Vec<Scalar> = (0..n * n)
            .map(|idx| amb.get(idx / n, idx % n) * &lip)
            .collect();
        for p in 0..self.subset.len() {
            for q in 0..self.subset.len() {
                if p == q {
                    continue;
                }
                let (a, b) = (self.subset[p], self.subset[q]);
                let prescribed = self.values.get(p, q);
                if *prescribed < w[a * n + b] {
                    w[a * n + b] = prescribed.clone();
                }
            }
        }
        shortest_path_closure(n, &mut w);
        for entry in w.iter_mut() {
            if *entry > cap {
                *entry = cap.clone();
            }
        }
        Pseudometric::from_raw_unchecked(n, w)
    }
}

/// Extend the data "distance `values[s][t]` between blocks `s` and `t`,
/// zero within each block" to the whole space, bounded by `cap` everywhere.
///
/// Blocks must be pairwise disjoint but need not cover the space; values
/// on uncovered points are filled by the shortest-path machinery of
/// [`PartialPseudometric::extend`]. The block-value matrix must itself be a
/// pseudometric on the block indices and `cap` must dominate it.
pub fn extend_prescribed_blocks(
    space: &FiniteSpace,
    blocks: &[Vec<usize>],
    values: &[Vec<Scalar>],
    cap: &Scalar,
) -> Result<Pseudometric, ExtendError> {
    let n = space.point_count();
    let mut seen = BTreeSet::new();
    for block in blocks {
        for &a in block {
            if a >= n {
                return Err(ExtendError::IndexOutOfRange { index: a, points: n });
            }
            if !seen.insert(a) {
                return Err(ExtendError::DuplicateIndex { index: a });
            }
        }
    }
    if values.len() != blocks.len() {
        return Err(ExtendError::ValueShape { expected: blocks.len(), rows: values.len() });
    }
    let block_values =
        Pseudometric::from_matrix(values).map_err(ExtendError::InvalidBlockValues)?;
    let max_value = block_values.norm();
    if *cap < max_value {
        return Err(ExtendError::CapBelowValues { cap: cap.clone(), max_value });
    }

    let mut subset = Vec::new();
    let mut block_of = Vec::new();
    for (s, block) in blocks.iter().enumerate() {
        for &a in block {
            subset.push(a);
            block_of.push(s);
        }
    }
    let k = subset.len();
    let rows: Vec<Vec<Scalar>> = (0..k)
        .map(|p| (0..k).map(|q| block_values.get(block_of[p], block_of[q]).clone()).collect())
        .collect();
    let partial = PartialPseudometric::new(space, &subset, &rows)?;
    Ok(partial.extend())
}
