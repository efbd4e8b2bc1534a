//! Exact computation in the cone of pseudometrics on a finite labeled space.
//!
//! Everything is carried out in arbitrary-precision rational arithmetic:
//! membership in the unique-peak class is a strict-inequality property and
//! must never be decided in floating point. The crate is `no_std` (with
//! `alloc`); IO, file formats and the command-line front end live in the
//! companion `pmcone-cli` crate.
//!
//! The main pieces:
//!
//! * [`metric`] — the pseudometric cone: validation, sup-norm, cone
//!   operations, balls, peak sets and the membership predicates for the
//!   admissible / compact-peak / unique-peak classes.
//! * [`extend`] — norm-preserving extension of a pseudometric from a subset
//!   to the whole space via Lipschitz rescaling, shortest-path closure and
//!   truncation.
//! * [`peaks`] — unique-peak perturbations: the layered annulus series, the
//!   densification and peak-translation constructions, and sums of metrics
//!   sharing a peak pair.
//! * [`recover`] — the recovery engine: checks a black-box metric-map oracle
//!   for isometry and zero preservation, reconstructs the pair bijection and
//!   the point bijection behind it, and verifies the canonical formula.
//! * [`gen`] — seeded, reproducible generation of random instances.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod extend;
pub mod gen;
pub mod metric;
pub mod peaks;
pub mod recover;
pub mod scalar;
pub mod space;
#[cfg(test)]
pub(crate) mod testutil;

pub use metric::{MetricViolation, PeakSet, Pseudometric, UPair};
pub use scalar::Scalar;
pub use space::FiniteSpace;
