//! JSON document types.
//!
//! Rationals travel as `"p/q"` strings (integer shorthand accepted on
//! input) so nothing is ever rounded on the wire; floating-point values
//! are rejected. Output is canonical: reduced fractions, integers without
//! a denominator, fixed field order.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use pmcone_core::metric::{MetricViolation, Pseudometric};
use pmcone_core::recover::{PointMap, Uniqueness};
use pmcone_core::scalar::Scalar;
use pmcone_core::FiniteSpace;

use crate::CliError;

/// A rational on the wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rat(pub Scalar);

pub fn parse_rational(text: &str) -> Result<Scalar, String> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        None => (text, "1"),
        Some((n, d)) => (n.trim(), d.trim()),
    };
    let numer: BigInt = numer.parse().map_err(|_| format!("bad numerator in {text:?}"))?;
    let denom: BigInt = denom.parse().map_err(|_| format!("bad denominator in {text:?}"))?;
    if denom.is_zero() {
        return Err(format!("zero denominator in {text:?}"));
    }
    Ok(Scalar::new(numer, denom))
}

/// Canonical text form: `"3"` or `"-1/2"`.
pub fn rational_text(s: &Scalar) -> String {
    s.to_string()
}

/// Display helper honoring the `--float` presentation flag.
pub fn display_rational(s: &Scalar, as_float: bool) -> String {
    if as_float {
        match s.to_f64() {
            Some(f) => format!("{f}"),
            None => rational_text(s),
        }
    } else {
        rational_text(s)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&rational_text(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RatVisitor;
        impl serde::de::Visitor<'_> for RatVisitor {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational string \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                parse_rational(v).map(Rat).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(Scalar::from_integer(BigInt::from(v))))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(Scalar::from_integer(BigInt::from(v))))
            }
        }
        deserializer.deserialize_any(RatVisitor)
    }
}

fn matrix_to_wire(rows: &[Vec<Scalar>]) -> Vec<Vec<Rat>> {
    rows.iter().map(|r| r.iter().map(|s| Rat(s.clone())).collect()).collect()
}

fn matrix_from_wire(rows: &[Vec<Rat>]) -> Vec<Vec<Scalar>> {
    rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect()
}

/// A finite space: labels plus an ambient admissible metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub points: Vec<String>,
    pub ambient: Vec<Vec<Rat>>,
}

impl SpaceDocument {
    pub fn to_space(&self) -> Result<FiniteSpace, CliError> {
        let ambient = Pseudometric::from_matrix(&matrix_from_wire(&self.ambient))
            .map_err(|v| CliError::domain(format!("ambient metric invalid: {v}")))?;
        FiniteSpace::new(self.points.clone(), ambient)
            .map_err(|e| CliError::domain(format!("space invalid: {e}")))
    }

    pub fn from_space(space: &FiniteSpace) -> Self {
        SpaceDocument {
            points: space.labels().to_vec(),
            ambient: matrix_to_wire(&space.ambient().rows()),
        }
    }
}

/// A pseudometric; `points` is optional and informational.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    pub entries: Vec<Vec<Rat>>,
}

impl MetricDocument {
    /// Raw matrix, not yet validated.
    pub fn matrix(&self) -> Vec<Vec<Scalar>> {
        matrix_from_wire(&self.entries)
    }

    /// Validate into a pseudometric; axiom violations are domain errors.
    pub fn to_metric(&self) -> Result<Pseudometric, CliError> {
        Pseudometric::from_matrix(&self.matrix())
            .map_err(|v| CliError::domain(format!("pseudometric invalid: {v}")))
    }

    pub fn from_metric(metric: &Pseudometric, points: Option<&[String]>) -> Self {
        MetricDocument {
            points: points.map(|p| p.to_vec()),
            entries: matrix_to_wire(&metric.rows()),
        }
    }
}

/// Declarative oracle specifications: no code is ever executed from a
/// document, and every kind is reproducible from its parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    /// The canonical oracle of a bijection, given as a label map from
    /// codomain points to domain points.
    Induced { map: BTreeMap<String, String> },
    /// `d -> d + offset`; an isometry that moves zero.
    Translation { offset: MetricDocument },
    /// `d -> factor * d`; not an isometry unless the factor is one.
    Scaling { factor: Rat },
    /// Conjugation of the matrix by a permutation of the domain labels:
    /// entry `(i,j)` of the image is entry `(perm[i],perm[j])` of the
    /// input.
    MatrixPermutation { permutation: Vec<String> },
    /// Composition, applied first to last; intermediate stages act on the
    /// domain space.
    Composite { stages: Vec<OracleSpec> },
}

/// Violation report for `validate`.
#[derive(Clone, Debug, Serialize)]
pub struct ViolationDocument {
    pub axiom: &'static str,
    pub witness: Vec<usize>,
    pub message: String,
}

impl ViolationDocument {
    pub fn from_violation(v: &MetricViolation) -> Self {
        let (axiom, witness) = match v {
            MetricViolation::NotSquare { row, len, expected } => {
                ("square", vec![*row, *len, *expected])
            }
            MetricViolation::Asymmetric { i, j } => ("symmetry", vec![*i, *j]),
            MetricViolation::NonzeroDiagonal { i } => ("zero-diagonal", vec![*i]),
            MetricViolation::NegativeEntry { i, j } => ("nonnegativity", vec![*i, *j]),
            MetricViolation::TriangleViolation { i, j, k } => ("triangle", vec![*i, *j, *k]),
        };
        ViolationDocument { axiom, witness, message: v.to_string() }
    }
}

/// The recovered bijection as a label map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointMapDocument {
    /// Codomain label to domain label.
    pub map: BTreeMap<String, String>,
    pub uniqueness: String,
}

impl PointMapDocument {
    pub fn new(phi: &PointMap, domain: &FiniteSpace, codomain: &FiniteSpace) -> Self {
        let map = (0..phi.len())
            .map(|y| (codomain.label(y).to_string(), domain.label(phi.apply(y)).to_string()))
            .collect();
        let uniqueness = match phi.uniqueness() {
            Uniqueness::Unique => "unique".to_string(),
            Uniqueness::AmbiguousCard2 => "ambiguous_card_2".to_string(),
        };
        PointMapDocument { map, uniqueness }
    }
}
