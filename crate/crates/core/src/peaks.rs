//! Unique-peak perturbation constructions.
//!
//! The workhorse is a layered series of annulus pseudometrics around a
//! chosen doubleton `{x,y}`: level `n` prescribes the full `level_value`
//! between small closed balls at `x` and `y`, half of it between those
//! balls and the far complement, and zero within each of the three blocks,
//! then extends to the whole space. The weighted series `sum rho_n / 2^n`
//! peaks strictly at `{x,y}`. On a finite space with an admissible base
//! metric the balls stabilize at a computable depth, after which every
//! level is the same pseudometric, so the infinite series has an exact
//! closed form: the partial sum plus a geometric tail.
//!
//! Two consumers: densification (perturb any pseudometric into the
//! unique-peak class within `4*epsilon` in sup-distance) and peak
//! translation (a summand that drags any pseudometric into the peak cone
//! at a prescribed doubleton while entering the unique-peak class).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::extend::{extend_prescribed_blocks, ExtendError};
use crate::metric::{Pseudometric, UPair};
use crate::scalar::{half_pow, int, Scalar};
use crate::space::FiniteSpace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeaksError {
    NotDoubleton,
    NotAdmissible,
    SizeMismatch { metric: usize, space: usize },
    RadiusNotPositive,
    LevelValueNotPositive,
    /// The layered construction needs `radius_base <= d(x,y)`; otherwise
    /// the closed balls at `x` and `y` may collide.
    RadiusExceedsPairDistance { radius: Scalar, pair_distance: Scalar },
    EpsilonNotPositive,
    SpaceTooSmall { points: usize },
    /// `peak_cone_sum` summand `index` does not attain its norm at the pair.
    NotInPeakCone { index: usize },
    EmptySum,
    Extend(ExtendError),
}

impl fmt::Display for PeaksError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotDoubleton => write!(f, "pair must consist of two distinct points"),
            Self::NotAdmissible => write!(f, "pseudometric must be admissible"),
            Self::SizeMismatch { metric, space } => {
                write!(f, "pseudometric on {metric} points but space has {space}")
            }
            Self::RadiusNotPositive => write!(f, "radius base must be positive"),
            Self::LevelValueNotPositive => write!(f, "level value must be positive"),
            Self::RadiusExceedsPairDistance { radius, pair_distance } => write!(
                f,
                "radius base {radius} exceeds the pair distance {pair_distance}"
            ),
            Self::EpsilonNotPositive => write!(f, "epsilon must be positive"),
            Self::SpaceTooSmall { points } => {
                write!(f, "need at least two points, space has {points}")
            }
            Self::NotInPeakCone { index } => {
                write!(f, "summand {index} does not attain its norm at the pair")
            }
            Self::EmptySum => write!(f, "cannot sum an empty list of pseudometrics"),
            Self::Extend(e) => write!(f, "extension failed: {e}"),
        }
    }
}

impl core::error::Error for PeaksError {}

impl From<ExtendError> for PeaksError {
    fn from(e: ExtendError) -> Self {
        PeaksError::Extend(e)
    }
}

/// The cone of pseudometrics attaining their norm at a fixed doubleton,
/// represented by its membership predicate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeakCone {
    pair: UPair,
}

impl PeakCone {
    pub fn new(pair: UPair) -> Result<Self, PeaksError> {
        if pair.is_doubleton() {
            Ok(PeakCone { pair })
        } else {
            Err(PeaksError::NotDoubleton)
        }
    }

    pub fn pair(&self) -> UPair {
        self.pair
    }

    pub fn contains(&self, d: &Pseudometric) -> bool {
        in_peak_cone(d, self.pair)
    }
}

/// `d` attains its norm at `pair` (exact comparison).
pub fn in_peak_cone(d: &Pseudometric, pair: UPair) -> bool {
    *d.at(pair) == d.norm()
}

fn check_layered_inputs(
    space: &FiniteSpace,
    d: &Pseudometric,
    pair: UPair,
    radius_base: &Scalar,
    level_value: &Scalar,
) -> Result<(), PeaksError> {
    if !pair.is_doubleton() {
        return Err(PeaksError::NotDoubleton);
    }
    if d.point_count() != space.point_count() {
        return Err(PeaksError::SizeMismatch {
            metric: d.point_count(),
            space: space.point_count(),
        });
    }
    if !d.is_admissible() {
        return Err(PeaksError::NotAdmissible);
    }
    if *radius_base <= Scalar::zero() {
        return Err(PeaksError::RadiusNotPositive);
    }
    if *level_value <= Scalar::zero() {
        return Err(PeaksError::LevelValueNotPositive);
    }
    if radius_base > d.at(pair) {
        return Err(PeaksError::RadiusExceedsPairDistance {
            radius: radius_base.clone(),
            pair_distance: d.at(pair).clone(),
        });
    }
    Ok(())
}

/// The single level-`n` annulus pseudometric (`n >= 1`): `level_value`
/// between the closed balls of radius `radius_base/2^{n+1}` at the two pair
/// points, half of it between those balls and the complement of the open
/// balls of radius `radius_base/2^n`, zero within blocks, at most
/// `level_value` elsewhere.
pub fn layered_rho_level(
    space: &FiniteSpace,
    d: &Pseudometric,
    pair: UPair,
    radius_base: &Scalar,
    level_value: &Scalar,
    level: usize,
) -> Result<Pseudometric, PeaksError> {
    check_layered_inputs(space, d, pair, radius_base, level_value)?;
    debug_assert!(level >= 1);
    let (x, y) = (pair.lo(), pair.hi());
    let r_closed = radius_base * half_pow(level + 1);
    let r_open = radius_base * half_pow(level);
    let ball_x = d.ball(x, &r_closed, true);
    let ball_y = d.ball(y, &r_closed, true);
    let open_x = d.ball(x, &r_open, false);
    let open_y = d.ball(y, &r_open, false);
    let far: Vec<usize> = (0..space.point_count())
        .filter(|p| !open_x.contains(p) && !open_y.contains(p))
        .collect();
    let half_value = level_value / int(2);
    let zero = Scalar::zero();
    let values = vec![
        vec![zero.clone(), level_value.clone(), half_value.clone()],
        vec![level_value.clone(), zero.clone(), half_value.clone()],
        vec![half_value.clone(), half_value, zero],
    ];
    Ok(extend_prescribed_blocks(space, &[ball_x, ball_y, far], &values, level_value)?)
}

/// Depth `N*` past which the level blocks are constant: the least `n >= 1`
/// with `radius_base / 2^n` strictly below the least positive distance of
/// `d`. From that level on, the closed balls are the singletons `{x}` and
/// `{y}` and the far block is the rest of the space.
pub fn stabilization_depth(d: &Pseudometric, radius_base: &Scalar) -> Option<usize> {
    let delta = d.min_positive_distance()?;
    let mut level = 1usize;
    let mut r = radius_base * half_pow(1);
    while r >= delta {
        level += 1;
        r = r * half_pow(1);
    }
    Some(level)
}

/// Exact value of the series `sum_{n>=1} rho_n / 2^n` of level
/// pseudometrics: the partial sum below the stabilization depth plus the
/// constant tail `rho_inf * 2^{-(N*-1)}`.
///
/// Requires `d` admissible (the balls must stabilize) and
/// `radius_base <= d(pair)` (the level blocks must be disjoint). The result
/// attains its norm `level_value` at `pair` and is strictly smaller on
/// every other pair.
pub fn layered_rho(
    space: &FiniteSpace,
    d: &Pseudometric,
    pair: UPair,
    radius_base: &Scalar,
    level_value: &Scalar,
) -> Result<Pseudometric, PeaksError> {
    check_layered_inputs(space, d, pair, radius_base, level_value)?;
    let depth = stabilization_depth(d, radius_base).expect("admissible on >= 2 points");
    let mut acc = Pseudometric::zero(space.point_count());
    for level in 1..depth {
        let rho = layered_rho_level(space, d, pair, radius_base, level_value, level)?;
        let term = rho.scale(&half_pow(level)).expect("positive weight");
        acc = acc.add(&term).expect("same point count");
    }
    let stable = layered_rho_level(space, d, pair, radius_base, level_value, depth)?;
    let tail = stable.scale(&half_pow(depth - 1)).expect("positive weight");
    Ok(acc.add(&tail).expect("same point count"))
}

/// Result of [`densify_to_pp`].
#[derive(Clone, Debug)]
pub struct Densified {
    /// The perturbed pseudometric, in the unique-peak class.
    pub perturbed: Pseudometric,
    /// Its unique peak pair.
    pub pair: UPair,
    /// The admissible input the perturbation was built on: the input
    /// itself, or the input plus the admissibility repair.
    pub repaired: Pseudometric,
    /// Norm of the admissibility repair that was mixed in (zero when the
    /// input was already admissible).
    pub repair_norm: Scalar,
    /// The epsilon actually used (shrunk to the base value when needed).
    pub epsilon: Scalar,
    /// Value of the (repaired) input at the peak pair.
    pub base_value: Scalar,
}

impl Densified {
    /// The peak value `base_value + 4 * epsilon`.
    pub fn peak_value(&self) -> Scalar {
        &self.base_value + int(4) * &self.epsilon
    }
}

/// Perturb `d` into the unique-peak class within `4*epsilon` in
/// sup-distance (plus an admissibility repair of norm at most `epsilon`
/// when `d` is not admissible).
///
/// The peak lands on the lexicographically least norm-attaining pair of the
/// (repaired) input, and the perturbed value there is exactly
/// `base_value + 4*epsilon`.
pub fn densify_to_pp(
    space: &FiniteSpace,
    d: &Pseudometric,
    epsilon: &Scalar,
) -> Result<Densified, PeaksError> {
    let n = space.point_count();
    if n < 2 {
        return Err(PeaksError::SpaceTooSmall { points: n });
    }
    if d.point_count() != n {
        return Err(PeaksError::SizeMismatch { metric: d.point_count(), space: n });
    }
    if *epsilon <= Scalar::zero() {
        return Err(PeaksError::EpsilonNotPositive);
    }
    let (base, repair_norm) = if d.is_admissible() {
        (d.clone(), Scalar::zero())
    } else {
        // Mix in a scaled copy of the ambient metric; the scale is chosen
        // so the added norm is exactly epsilon.
        let amb_norm = space.ambient().norm();
        let repair = space.ambient().scale(&(epsilon / &amb_norm)).expect("positive scale");
        (d.add(&repair).expect("same point count"), epsilon.clone())
    };
    // Lexicographically least argmax pair; the repaired input is admissible
    // on >= 2 points, so the norm is positive and only doubletons attain it.
    let pair = *base
        .peak_set()
        .pairs()
        .iter()
        .next()
        .expect("admissible metric on >= 2 points has a peak");
    let base_value = base.at(pair).clone();
    let eps_used = if *epsilon < base_value { epsilon.clone() } else { base_value.clone() };
    let rho = layered_rho(space, &base, pair, &eps_used, &(int(4) * &eps_used))?;
    let perturbed = base.add(&rho).expect("same point count");
    Ok(Densified { perturbed, pair, repaired: base, repair_norm, epsilon: eps_used, base_value })
}

/// Result of [`peak_translate`].
#[derive(Clone, Debug)]
pub struct Translated {
    /// The translating summand: attains its norm at the pair, and `d + rho`
    /// lies in the peak cone at the pair intersected with the unique-peak
    /// class.
    pub rho: Pseudometric,
    /// Value of the (repaired) input at the pair.
    pub base_value: Scalar,
    /// `min(max_z d(x,z), max_z d(y,z))` over the (repaired) input; always
    /// at least `base_value`.
    pub breadth: Scalar,
    /// Norm of the admissibility repair folded into `rho` (zero when the
    /// input was admissible).
    pub repair_norm: Scalar,
}

impl Translated {
    /// `(d + rho)(pair) = base_value + 4 * breadth`.
    pub fn peak_value(&self) -> Scalar {
        &self.base_value + int(4) * &self.breadth
    }
}

/// A summand `rho` attaining its norm at `pair` such that `d + rho` attains
/// its norm at `pair` and nowhere else.
///
/// When `d` is not admissible, an admissible metric peaking at `pair`
/// (built from the ambient metric) is folded into the returned summand
/// first; `base_value` and `breadth` refer to the repaired input.
pub fn peak_translate(
    space: &FiniteSpace,
    d: &Pseudometric,
    pair: UPair,
) -> Result<Translated, PeaksError> {
    if !pair.is_doubleton() {
        return Err(PeaksError::NotDoubleton);
    }
    let n = space.point_count();
    if d.point_count() != n {
        return Err(PeaksError::SizeMismatch { metric: d.point_count(), space: n });
    }
    let (base, repair) = if d.is_admissible() {
        (d.clone(), None)
    } else {
        let fix = admissible_peak_at(space, pair)?;
        (d.add(&fix).expect("same point count"), Some(fix))
    };
    let (x, y) = (pair.lo(), pair.hi());
    let base_value = base.at(pair).clone();
    let reach_x = (0..n).map(|z| base.get(x, z)).max().expect("nonempty").clone();
    let reach_y = (0..n).map(|z| base.get(y, z)).max().expect("nonempty").clone();
    let breadth = reach_x.min(reach_y);
    let core = layered_rho(space, &base, pair, &base_value, &(int(4) * &breadth))?;
    let (rho, repair_norm) = match repair {
        None => (core, Scalar::zero()),
        Some(fix) => {
            let norm = fix.norm();
            (fix.add(&core).expect("same point count"), norm)
        }
    };
    Ok(Translated { rho, base_value, breadth, repair_norm })
}

/// An admissible metric with a strict unique peak at `pair`, derived from
/// the ambient metric. Used as the repair term in [`peak_translate`] and as
/// a building block for separating witnesses.
pub fn admissible_peak_at(space: &FiniteSpace, pair: UPair) -> Result<Pseudometric, PeaksError> {
    if !pair.is_doubleton() {
        return Err(PeaksError::NotDoubleton);
    }
    let amb = space.ambient();
    let t = peak_translate(space, amb, pair)?;
    Ok(amb.add(&t.rho).expect("same point count"))
}

/// A seed-dependent element of the peak cone at `pair` intersected with the
/// unique-peak class: peak translation applied to the ambient metric mixed
/// with a seeded random admissible metric. Distinct seeds give distinct
/// outputs on spaces with enough points.
pub fn peaking_metric_at(
    space: &FiniteSpace,
    pair: UPair,
    seed: u64,
) -> Result<Pseudometric, PeaksError> {
    if !pair.is_doubleton() {
        return Err(PeaksError::NotDoubleton);
    }
    let mut rng = crate::gen::seeded(seed);
    let mix = crate::gen::random_admissible(space.point_count(), &mut rng);
    let base = space.ambient().add(&mix).expect("same point count");
    let t = peak_translate(space, &base, pair)?;
    Ok(base.add(&t.rho).expect("same point count"))
}

/// Sum of pseudometrics that all attain their norm at `pair`. The sum does
/// too, and its norm is the sum of the norms.
pub fn peak_cone_sum(ds: &[Pseudometric], pair: UPair) -> Result<Pseudometric, PeaksError> {
    let first = ds.first().ok_or(PeaksError::EmptySum)?;
    let mut acc = Pseudometric::zero(first.point_count());
    for (index, d) in ds.iter().enumerate() {
        if d.point_count() != first.point_count() {
            return Err(PeaksError::SizeMismatch {
                metric: d.point_count(),
                space: first.point_count(),
            });
        }
        if !in_peak_cone(d, pair) {
            return Err(PeaksError::NotInPeakCone { index });
        }
        acc = acc.add(d).expect("same point count");
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::metric::doubletons;
    use crate::scalar::frac;
    use crate::testutil::{arb_admissible, arb_pseudometric, arb_space, pm3, uniform_space};
    use proptest::prelude::*;

    #[test]
    fn peak_cone_membership_examples() {
        let pair = UPair::new(0, 2);
        assert!(in_peak_cone(&Pseudometric::zero(3), pair));
        let d = pm3(1, 2, 1);
        assert!(in_peak_cone(&d, UPair::new(0, 2)));
        assert!(!in_peak_cone(&d, UPair::new(0, 1)));
        assert!(PeakCone::new(pair).unwrap().contains(&d));
        assert_eq!(PeakCone::new(UPair::new(1, 1)).unwrap_err(), PeaksError::NotDoubleton);
    }

    #[test]
    fn layered_rho_on_two_points_is_the_level_value() {
        let sp = uniform_space(2);
        let d = sp.ambient().clone();
        let pair = UPair::new(0, 1);
        let rho = layered_rho(&sp, &d, pair, &int(1), &int(4)).unwrap();
        assert_eq!(*rho.get(0, 1), int(4));
    }

    #[test]
    fn layered_rho_three_point_example() {
        // d(x,y)=2, d(x,z)=d(y,z)=1 with radius 1/2 and level value 2: the
        // balls stabilize immediately, so the series equals its constant
        // level (2, 1, 1) exactly and dominates strictly off the pair.
        let sp = uniform_space(3);
        let d = pm3(2, 1, 1);
        let pair = UPair::new(0, 1);
        let rho = layered_rho(&sp, &d, pair, &frac(1, 2), &int(2)).unwrap();
        assert_eq!(*rho.get(0, 1), int(2));
        assert_eq!(*rho.get(0, 2), int(1));
        assert_eq!(*rho.get(1, 2), int(1));
        assert_eq!(rho.norm(), int(2));

        let bumped = d.add(&rho).unwrap();
        assert_eq!(bumped.peak_set().single(), Some(pair));
    }

    #[test]
    fn layered_rho_rejects_bad_inputs() {
        let sp = uniform_space(3);
        let d = pm3(1, 2, 1);
        assert_eq!(
            layered_rho(&sp, &d, UPair::new(1, 1), &int(1), &int(4)).unwrap_err(),
            PeaksError::NotDoubleton
        );
        assert_eq!(
            layered_rho(&sp, &pm3(0, 1, 1), UPair::new(0, 1), &int(1), &int(4)).unwrap_err(),
            PeaksError::NotAdmissible
        );
        assert_eq!(
            layered_rho(&sp, &d, UPair::new(0, 1), &int(0), &int(4)).unwrap_err(),
            PeaksError::RadiusNotPositive
        );
        assert_eq!(
            layered_rho(&sp, &d, UPair::new(0, 1), &int(1), &int(0)).unwrap_err(),
            PeaksError::LevelValueNotPositive
        );
        // d(0,1) = 1 < radius 2.
        assert_eq!(
            layered_rho(&sp, &d, UPair::new(0, 1), &int(2), &int(4)).unwrap_err(),
            PeaksError::RadiusExceedsPairDistance { radius: int(2), pair_distance: int(1) }
        );
    }

    #[test]
    fn stabilization_depth_matches_definition() {
        let d = pm3(2, 1, 1);
        // radius 1/2: 1/4 < 1 at the first level.
        assert_eq!(stabilization_depth(&d, &frac(1, 2)), Some(1));
        // radius 8: 8/2^n < 1 first at n = 4.
        assert_eq!(stabilization_depth(&d, &int(8)), Some(4));
        assert_eq!(stabilization_depth(&Pseudometric::zero(3), &int(1)), None);
    }

    /// Series summed level by level, no geometric-tail shortcut.
    fn explicit_partial_sum(
        sp: &FiniteSpace,
        d: &Pseudometric,
        pair: UPair,
        radius: &Scalar,
        value: &Scalar,
        depth: usize,
    ) -> Pseudometric {
        let mut acc = Pseudometric::zero(sp.point_count());
        for level in 1..=depth {
            let rho = layered_rho_level(sp, d, pair, radius, value, level).unwrap();
            acc = acc.add(&rho.scale(&half_pow(level)).unwrap()).unwrap();
        }
        acc
    }

    #[test]
    fn closed_form_series_matches_explicit_partial_sums() {
        let sp = uniform_space(4);
        let mut rng = gen::seeded(5);
        let d = gen::random_admissible(4, &mut rng);
        let pair = UPair::new(0, 2);
        let radius = d.at(pair).clone();
        let value = int(3);
        let closed = layered_rho(&sp, &d, pair, &radius, &value).unwrap();
        let depth = stabilization_depth(&d, &radius).unwrap() + 20;
        let partial = explicit_partial_sum(&sp, &d, pair, &radius, &value, depth);
        let stable =
            layered_rho_level(&sp, &d, pair, &radius, &value, depth).unwrap();
        let tail_weight = half_pow(depth);
        for i in 0..4 {
            for j in 0..4 {
                // The closed form exceeds the partial sum by exactly the
                // geometric tail of the stabilized level, which brackets it
                // between the partial sum and the partial sum plus the tail
                // bound.
                let diff = closed.get(i, j) - partial.get(i, j);
                assert_eq!(diff, stable.get(i, j) * &tail_weight);
                assert!(diff >= int(0));
                assert!(diff <= &value * &tail_weight);
            }
        }
    }

    #[test]
    fn densify_lands_in_unique_peak_class_with_exact_bounds() {
        let sp = uniform_space(3);
        let d = pm3(1, 2, 1);
        let eps = frac(1, 2);
        let out = densify_to_pp(&sp, &d, &eps).unwrap();
        assert_eq!(out.pair, UPair::new(0, 2));
        assert_eq!(out.base_value, int(2));
        assert_eq!(out.epsilon, eps);
        assert_eq!(out.repair_norm, int(0));
        // Peak value a + 4*eps and perturbation exactly ||rho|| = 4*eps.
        assert_eq!(*out.perturbed.at(out.pair), int(4));
        assert_eq!(out.peak_value(), int(4));
        assert_eq!(d.sup_distance(&out.perturbed).unwrap(), int(2));
        assert!(out.perturbed.in_pp());
    }

    #[test]
    fn densify_repairs_non_admissible_inputs() {
        let sp = uniform_space(3);
        let d = pm3(0, 1, 1);
        let eps = frac(1, 4);
        let out = densify_to_pp(&sp, &d, &eps).unwrap();
        assert_eq!(out.repair_norm, eps);
        assert!(out.perturbed.in_pp());
        // Perturbation within 4*eps plus the repair margin.
        let moved = d.sup_distance(&out.perturbed).unwrap();
        assert!(moved <= int(4) * &eps + &eps);
    }

    #[test]
    fn densify_shrinks_epsilon_to_the_base_value() {
        let sp = uniform_space(2);
        let d = sp.ambient().scale(&frac(1, 2)).unwrap();
        let out = densify_to_pp(&sp, &d, &int(3)).unwrap();
        assert_eq!(out.epsilon, frac(1, 2));
        assert_eq!(*out.perturbed.get(0, 1), frac(5, 2));
    }

    #[test]
    fn densify_keeps_the_peak_of_a_unique_peak_input() {
        let sp = uniform_space(3);
        // Unique peak at {0,1} with a wide margin.
        let d = pm3(10, 6, 6);
        assert!(d.in_pp());
        let out = densify_to_pp(&sp, &d, &int(1)).unwrap();
        assert_eq!(out.pair, UPair::new(0, 1));
        assert_eq!(out.perturbed.peak_set().single(), Some(UPair::new(0, 1)));
    }

    #[test]
    fn densify_rejects_bad_inputs() {
        let sp = uniform_space(1);
        assert_eq!(
            densify_to_pp(&sp, &Pseudometric::zero(1), &int(1)).unwrap_err(),
            PeaksError::SpaceTooSmall { points: 1 }
        );
        let sp = uniform_space(2);
        assert_eq!(
            densify_to_pp(&sp, &Pseudometric::zero(2), &int(0)).unwrap_err(),
            PeaksError::EpsilonNotPositive
        );
    }

    #[test]
    fn translate_worked_example() {
        // d(x,y)=1, d(x,z)=d(y,z)=2: base value 1, breadth 2, summand
        // (8,4,4), peak value 9.
        let sp = uniform_space(3);
        let d = pm3(1, 2, 2);
        let pair = UPair::new(0, 1);
        let t = peak_translate(&sp, &d, pair).unwrap();
        assert_eq!(t.base_value, int(1));
        assert_eq!(t.breadth, int(2));
        assert!(t.base_value <= t.breadth);
        assert_eq!(*t.rho.get(0, 1), int(8));
        assert_eq!(*t.rho.get(0, 2), int(4));
        assert_eq!(*t.rho.get(1, 2), int(4));
        assert_eq!(t.rho.norm(), int(8));
        assert!(in_peak_cone(&t.rho, pair));

        let moved = d.add(&t.rho).unwrap();
        assert_eq!(*moved.at(pair), int(9));
        assert_eq!(t.peak_value(), int(9));
        assert_eq!(moved.peak_set().single(), Some(pair));
        assert!(moved.in_pp());
        assert!(in_peak_cone(&moved, pair));
    }

    #[test]
    fn translate_on_two_points() {
        let sp = uniform_space(2);
        let d = sp.ambient().clone();
        let t = peak_translate(&sp, &d, UPair::new(0, 1)).unwrap();
        assert_eq!(t.base_value, int(1));
        assert_eq!(t.breadth, int(1));
        assert_eq!(*d.add(&t.rho).unwrap().get(0, 1), int(5));
    }

    #[test]
    fn translate_repairs_the_zero_pseudometric() {
        let sp = uniform_space(3);
        let d = Pseudometric::zero(3);
        let pair = UPair::new(0, 1);
        let t = peak_translate(&sp, &d, pair).unwrap();
        // Repair is the ambient-based peaking metric (5,3,3); on top of it
        // the translation contributes (20,10,10).
        assert_eq!(t.repair_norm, int(5));
        assert_eq!(t.base_value, int(5));
        assert_eq!(t.breadth, int(5));
        assert_eq!(*t.rho.get(0, 1), int(25));
        assert_eq!(*t.rho.get(0, 2), int(13));
        assert!(in_peak_cone(&t.rho, pair));
        let moved = d.add(&t.rho).unwrap();
        assert_eq!(*moved.at(pair), t.peak_value());
        assert!(moved.in_pp());
        assert!(in_peak_cone(&moved, pair));
    }

    #[test]
    fn admissible_peak_is_admissible_with_strict_peak() {
        let sp = uniform_space(4);
        let pair = UPair::new(1, 3);
        let sigma = admissible_peak_at(&sp, pair).unwrap();
        assert!(sigma.is_admissible());
        assert!(sigma.in_pp());
        assert_eq!(sigma.peak_set().single(), Some(pair));
    }

    #[test]
    fn peaking_metrics_are_unique_peak_elements_of_the_cone() {
        let sp = uniform_space(3);
        let pair = UPair::new(0, 2);
        for seed in 0..4 {
            let o = peaking_metric_at(&sp, pair, seed).unwrap();
            assert!(in_peak_cone(&o, pair));
            assert!(o.in_pp());
            assert_eq!(o.peak_set().single(), Some(pair));
        }
    }

    #[test]
    fn peaking_metrics_differ_across_seeds() {
        let sp = uniform_space(3);
        let pair = UPair::new(0, 1);
        let a = peaking_metric_at(&sp, pair, 0).unwrap();
        let b = peaking_metric_at(&sp, pair, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn peaking_metric_on_two_points_is_positive() {
        let sp = uniform_space(2);
        let o = peaking_metric_at(&sp, UPair::new(0, 1), 9).unwrap();
        assert!(*o.get(0, 1) > int(0));
    }

    #[test]
    fn peak_cone_sum_examples() {
        let sp = uniform_space(3);
        let pair = UPair::new(0, 1);
        let a = peaking_metric_at(&sp, pair, 0).unwrap();
        let b = peaking_metric_at(&sp, pair, 1).unwrap();

        assert_eq!(peak_cone_sum(&[a.clone()], pair).unwrap(), a);

        let sum = peak_cone_sum(&[a.clone(), b.clone()], pair).unwrap();
        assert!(in_peak_cone(&sum, pair));
        assert_eq!(sum.norm(), a.norm() + b.norm());
        // Unique-peak summands with a common peak keep the sum unique-peak.
        assert!(sum.in_pp());
        assert_eq!(sum.peak_set().single(), Some(pair));

        let err = peak_cone_sum(&[a.clone(), pm3(1, 2, 1)], pair).unwrap_err();
        assert_eq!(err, PeaksError::NotInPeakCone { index: 1 });
        assert_eq!(peak_cone_sum(&[], pair).unwrap_err(), PeaksError::EmptySum);
    }

    #[test]
    fn mixed_peak_pairs_make_the_norm_strictly_subadditive() {
        let sp = uniform_space(4);
        let a = peaking_metric_at(&sp, UPair::new(0, 1), 0).unwrap();
        let b = peaking_metric_at(&sp, UPair::new(2, 3), 0).unwrap();
        let sum = a.add(&b).unwrap();
        assert!(sum.norm() < a.norm() + b.norm());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn densify_quantitative_contract(
            sp in arb_space(4),
            d in arb_pseudometric(4),
            eps_num in prop::sample::select(alloc::vec![1i64, 2, 4, 8]),
        ) {
            let eps = frac(1, eps_num);
            let out = densify_to_pp(&sp, &d, &eps).unwrap();
            prop_assert!(out.perturbed.is_admissible());
            prop_assert_eq!(out.perturbed.peak_set().single(), Some(out.pair));
            prop_assert!(out.perturbed.in_pp());
            let moved = d.sup_distance(&out.perturbed).unwrap();
            prop_assert!(moved <= int(4) * &eps + &out.repair_norm);
            prop_assert_eq!(out.perturbed.at(out.pair).clone(), out.peak_value());
        }

        #[test]
        fn translate_contract(
            sp in arb_space(5),
            d in arb_admissible(5),
            lo in 0usize..5,
            hi in 0usize..5,
        ) {
            prop_assume!(lo != hi);
            let pair = UPair::new(lo, hi);
            let t = peak_translate(&sp, &d, pair).unwrap();
            prop_assert!(t.base_value <= t.breadth);
            prop_assert_eq!(t.rho.at(pair).clone(), int(4) * &t.breadth);
            prop_assert_eq!(t.rho.norm(), int(4) * &t.breadth);
            let moved = d.add(&t.rho).unwrap();
            prop_assert_eq!(moved.at(pair).clone(), t.peak_value());
            prop_assert_eq!(moved.peak_set().single(), Some(pair));
            prop_assert!(moved.in_pp());
        }

        #[test]
        fn layered_rho_dominates_strictly(
            sp in arb_space(4),
            d in arb_admissible(4),
        ) {
            let pair = UPair::new(0, 3);
            let radius = d.at(pair).clone();
            let value = int(2);
            let rho = layered_rho(&sp, &d, pair, &radius, &value).unwrap();
            prop_assert_eq!(rho.at(pair).clone(), value.clone());
            prop_assert_eq!(rho.norm(), value.clone());
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if UPair::new(i, j) != pair {
                        prop_assert!(*rho.get(i, j) < value);
                    }
                }
            }
        }

        #[test]
        fn sum_lemma_over_shared_peaks(
            seeds in proptest::collection::vec(0u64..64, 2..5),
            which in 0usize..6,
        ) {
            let sp = uniform_space(4);
            let pair = doubletons(4).nth(which).unwrap();
            let parts: alloc::vec::Vec<Pseudometric> = seeds
                .iter()
                .map(|&s| peaking_metric_at(&sp, pair, s).unwrap())
                .collect();
            let sum = peak_cone_sum(&parts, pair).unwrap();
            prop_assert!(in_peak_cone(&sum, pair));
            let total: Scalar = parts.iter().map(|p| p.norm()).sum();
            prop_assert_eq!(sum.norm(), total);
            prop_assert!(sum.in_pp());
        }
    }
}
