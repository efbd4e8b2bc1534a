//! Finite labeled point sets carrying an ambient admissible metric.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::metric::Pseudometric;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceError {
    Empty,
    DuplicateLabel(String),
    AmbientSizeMismatch { labels: usize, ambient: usize },
    /// The ambient matrix vanishes between the two distinct points.
    AmbientNotAdmissible { i: usize, j: usize },
}

impl fmt::Display for SpaceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "a space needs at least one point"),
            Self::DuplicateLabel(l) => write!(f, "duplicate point label {l:?}"),
            Self::AmbientSizeMismatch { labels, ambient } => {
                write!(f, "{labels} labels but ambient metric on {ambient} points")
            }
            Self::AmbientNotAdmissible { i, j } => {
                write!(f, "ambient metric vanishes between distinct points {i} and {j}")
            }
        }
    }
}

impl core::error::Error for SpaceError {}

/// A finite metrizable space: distinct point labels plus an ambient
/// admissible metric on the same index set. On a finite carrier the ambient
/// metric induces the discrete topology, so every pseudometric on the index
/// set is automatically continuous and bounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    ambient: Pseudometric,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, ambient: Pseudometric) -> Result<Self, SpaceError> {
        if labels.is_empty() {
            return Err(SpaceError::Empty);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        if ambient.point_count() != labels.len() {
            return Err(SpaceError::AmbientSizeMismatch {
                labels: labels.len(),
                ambient: ambient.point_count(),
            });
        }
        for i in 0..labels.len() {
            for j in (i + 1)..labels.len() {
                if ambient.get(i, j) == &crate::scalar::zero() {
                    return Err(SpaceError::AmbientNotAdmissible { i, j });
                }
            }
        }
        Ok(FiniteSpace { labels, ambient })
    }

    /// Space with points `p0..p{n-1}` where all distinct points are at
    /// ambient distance one. Handy default carrier.
    pub fn uniform(n: usize) -> Result<Self, SpaceError> {
        use alloc::format;
        let labels = (0..n).map(|i| format!("p{i}")).collect();
        let ambient = Pseudometric::from_fn(n, |_, _| crate::scalar::int(1))
            .expect("uniform matrix is a metric");
        Self::new(labels, ambient)
    }

    pub fn point_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn ambient(&self) -> &Pseudometric {
        &self.ambient
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::pm3;
    use alloc::vec;

    #[test]
    fn rejects_duplicate_labels_and_degenerate_ambient() {
        let err = FiniteSpace::new(vec!["a".into(), "a".into()], pm3(1, 1, 1));
        assert!(matches!(err, Err(SpaceError::DuplicateLabel(_))));

        let err = FiniteSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            pm3(0, 1, 1),
        );
        assert_eq!(err.unwrap_err(), SpaceError::AmbientNotAdmissible { i: 0, j: 1 });

        assert!(matches!(FiniteSpace::new(vec![], pm3(1, 1, 1)), Err(SpaceError::Empty)));
        assert!(matches!(
            FiniteSpace::new(vec!["a".into()], pm3(1, 1, 1)),
            Err(SpaceError::AmbientSizeMismatch { .. })
        ));
    }

    #[test]
    fn label_lookup() {
        let sp = FiniteSpace::new(vec!["x".into(), "y".into(), "z".into()], pm3(1, 2, 1)).unwrap();
        assert_eq!(sp.index_of("y"), Some(1));
        assert_eq!(sp.index_of("w"), None);
        assert_eq!(sp.label(2), "z");
        assert_eq!(sp.point_count(), 3);
    }
}
