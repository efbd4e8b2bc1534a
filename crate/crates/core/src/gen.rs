//! Seeded, reproducible generation of random instances.
//!
//! Admissible metrics are produced by sampling integer points in a bounded
//! box under the max-coordinate distance and adding a strictly positive
//! random symmetric perturbation, then taking the shortest-path closure.
//! Validity is guaranteed by construction, so there are no rejection loops.
//! Pseudometrics are pulled back along a random quotient of the point set,
//! which mixes in degenerate (vanishing) entries.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extend::shortest_path_closure;
use crate::metric::Pseudometric;
use crate::scalar::{frac, int, Scalar};
use crate::space::FiniteSpace;

/// The deterministic stream used everywhere seeds appear.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const BOX_SIDE: i64 = 8;
const BOX_DIM: usize = 3;
const GRAIN: i64 = 16;

/// A random admissible metric on `n` points with entries in `(0, 17]`,
/// denominators dividing 16.
pub fn random_admissible(n: usize, rng: &mut impl Rng) -> Pseudometric {
    if n <= 1 {
        return Pseudometric::zero(n);
    }
    let coords: Vec<[i64; BOX_DIM]> = (0..n)
        .map(|_| {
            let mut p = [0i64; BOX_DIM];
            for c in p.iter_mut() {
                *c = rng.gen_range(0..BOX_SIDE);
            }
            p
        })
        .collect();
    let mut w: Vec<Scalar> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                w.push(Scalar::zero());
            } else {
                let (a, b) = (coords[i.min(j)], coords[i.max(j)]);
                let cheb = (0..BOX_DIM).map(|c| (a[c] - b[c]).abs()).max().unwrap();
                w.push(int(cheb));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let bump = frac(1 + rng.gen_range(0..GRAIN), GRAIN);
            let v = &w[i * n + j] + &bump;
            w[i * n + j] = v.clone();
            w[j * n + i] = v;
        }
    }
    shortest_path_closure(n, &mut w);
    Pseudometric::from_raw_unchecked(n, w)
}

/// A random pseudometric on `n` points: either admissible outright or the
/// pullback of an admissible metric along a random quotient map (so zero
/// off-diagonal entries do occur, including the zero pseudometric).
pub fn random_pseudometric(n: usize, rng: &mut impl Rng) -> Pseudometric {
    if n <= 1 {
        return Pseudometric::zero(n);
    }
    if rng.gen_bool(0.5) {
        return random_admissible(n, rng);
    }
    let raw_class: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut reps: Vec<usize> = Vec::new();
    let class: Vec<usize> = raw_class
        .iter()
        .map(|&c| {
            if let Some(pos) = reps.iter().position(|&r| r == c) {
                pos
            } else {
                reps.push(c);
                reps.len() - 1
            }
        })
        .collect();
    let k = reps.len();
    if k == 1 {
        return Pseudometric::zero(n);
    }
    let quotient = random_admissible(k, rng);
    Pseudometric::from_raw_unchecked(
        n,
        (0..n * n).map(|idx| quotient.get(class[idx / n], class[idx % n]).clone()).collect(),
    )
}

/// Rescale `d` to the given sup-norm. `None` if `d` is zero and the target
/// is not.
pub fn with_norm(d: &Pseudometric, target: &Scalar) -> Option<Pseudometric> {
    let norm = d.norm();
    if norm.is_zero() {
        return target.is_zero().then(|| d.clone());
    }
    let factor = target / &norm;
    d.scale(&factor).ok()
}

/// A uniformly random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// A random finite space: labels `p0..p{n-1}` with a random admissible
/// ambient metric.
pub fn random_space(n: usize, rng: &mut impl Rng) -> FiniteSpace {
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::new(labels, random_admissible(n, rng)).expect("generated ambient is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_admissible_is_valid_and_admissible() {
        let mut rng = seeded(7);
        for n in 1..=9 {
            let d = random_admissible(n, &mut rng);
            assert!(Pseudometric::from_matrix(&d.rows()).is_ok());
            assert!(d.is_admissible());
        }
    }

    #[test]
    fn random_pseudometric_is_valid() {
        let mut rng = seeded(11);
        let mut saw_degenerate = false;
        for _ in 0..60 {
            let d = random_pseudometric(6, &mut rng);
            assert!(Pseudometric::from_matrix(&d.rows()).is_ok());
            if !d.is_admissible() {
                saw_degenerate = true;
            }
        }
        assert!(saw_degenerate, "quotient path never produced a degenerate instance");
    }

    #[test]
    fn with_norm_hits_target_exactly() {
        let mut rng = seeded(3);
        let d = random_admissible(5, &mut rng);
        let scaled = with_norm(&d, &int(4)).unwrap();
        assert_eq!(scaled.norm(), int(4));
        assert!(with_norm(&Pseudometric::zero(4), &int(1)).is_none());
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = random_admissible(6, &mut seeded(42));
        let b = random_admissible(6, &mut seeded(42));
        let c = random_admissible(6, &mut seeded(43));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_permutation_is_a_permutation() {
        let mut rng = seeded(5);
        let perm = random_permutation(8, &mut rng);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
    }
}
