//! Shared strategies and fixtures for the in-crate test suites.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;
use proptest::prelude::*;

use crate::extend::shortest_path_closure;
use crate::metric::Pseudometric;
use crate::scalar::{frac, int, Scalar};
use crate::space::FiniteSpace;

/// A pseudometric built from arbitrary nonnegative quarter-integer weights
/// by shortest-path repair. Zero entries survive, so the result is not
/// admissible in general.
pub(crate) fn arb_pseudometric(n: usize) -> impl Strategy<Value = Pseudometric> {
    let pairs = n * (n - 1) / 2;
    proptest::collection::vec(0i64..25, pairs).prop_map(move |raw| close_weights(n, &raw))
}

/// An admissible metric: strictly positive weights, then repair.
pub(crate) fn arb_admissible(n: usize) -> impl Strategy<Value = Pseudometric> {
    let pairs = n * (n - 1) / 2;
    proptest::collection::vec(1i64..25, pairs).prop_map(move |raw| close_weights(n, &raw))
}

/// A finite space with a random admissible ambient metric.
pub(crate) fn arb_space(n: usize) -> impl Strategy<Value = FiniteSpace> {
    arb_admissible(n).prop_map(move |ambient| {
        let labels = (0..n).map(|i| alloc::format!("p{i}")).collect();
        FiniteSpace::new(labels, ambient).expect("repaired weights are admissible")
    })
}

pub(crate) fn close_weights(n: usize, raw: &[i64]) -> Pseudometric {
    let mut w = vec![Scalar::zero(); n * n];
    let mut it = raw.iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = frac(*it.next().expect("one weight per pair"), 4);
            w[i * n + j] = v.clone();
            w[j * n + i] = v;
        }
    }
    shortest_path_closure(n, &mut w);
    Pseudometric::from_raw_unchecked(n, w)
}

/// Three-point pseudometric from integer distances `(d01, d02, d12)`.
pub(crate) fn pm3(d01: i64, d02: i64, d12: i64) -> Pseudometric {
    Pseudometric::from_matrix(&rows3(d01, d02, d12)).expect("valid three-point metric")
}

pub(crate) fn rows3(d01: i64, d02: i64, d12: i64) -> Vec<Vec<Scalar>> {
    vec![
        vec![int(0), int(d01), int(d02)],
        vec![int(d01), int(0), int(d12)],
        vec![int(d02), int(d12), int(0)],
    ]
}

pub(crate) fn uniform_space(n: usize) -> FiniteSpace {
    FiniteSpace::uniform(n).expect("uniform space is valid")
}
