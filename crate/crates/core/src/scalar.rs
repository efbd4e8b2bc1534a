//! Exact scalar type: arbitrary-precision rationals.
//!
//! `num_rational::BigRational` already maintains the invariants we need
//! (nonzero denominator, canonical reduced form), so it is used directly.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Scalar = num_rational::BigRational;

/// Integer as a scalar.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// The fraction `p/q`. Panics if `q == 0`.
pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// The dyadic fraction `1/2^n`, exact for any `n`.
pub fn half_pow(n: usize) -> Scalar {
    Scalar::new(BigInt::one(), BigInt::one() << n)
}

pub fn is_nonneg(s: &Scalar) -> bool {
    !s.is_negative()
}

/// Maximum of a nonempty iterator of scalars; `None` when empty.
pub fn max_of<'a, I: IntoIterator<Item = &'a Scalar>>(iter: I) -> Option<&'a Scalar> {
    iter.into_iter().max()
}

/// Render a scalar matrix row-major; handy in error text.
pub fn matrix_to_rows(n: usize, entries: &[Scalar]) -> Vec<Vec<Scalar>> {
    (0..n)
        .map(|i| entries[i * n..(i + 1) * n].to_vec())
        .collect()
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_reduces_to_canonical_form() {
        assert_eq!(frac(2, 4), frac(1, 2));
        assert_eq!(frac(-3, -6), frac(1, 2));
        assert_eq!(frac(6, 3), int(2));
    }

    #[test]
    fn half_pow_is_exact_for_large_exponents() {
        assert_eq!(half_pow(3), frac(1, 8));
        let tiny = half_pow(100);
        assert_eq!(tiny * Scalar::from_integer(BigInt::one() << 100), int(1));
    }
}
