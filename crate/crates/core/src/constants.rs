//! Every closed-form optimal constant, bound, and one-dimensional
//! optimization in the laboratory's scope.
//!
//! All constants with integer inputs are computed in exact rational
//! arithmetic ([`Rational`]) and converted to floating point only at the
//! boundary, so golden tests can compare exactly.

use num::rational::Ratio;
use num::ToPrimitive;

use crate::error::{Error, Result};
use crate::geometry::Dimension;

/// Exact rational value with `i64` numerator and denominator.
pub type Rational = Ratio<i64>;

fn q(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

fn to_f64(r: Rational) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

/// What the underlying variational problem does with its infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttainedClaim {
    /// The infimum is approached but no admissible minimizer exists.
    NotAttained,
    /// An explicit minimizer exists in the energy space.
    Attained,
    /// Attainment is not settled in this laboratory's scope.
    Unknown,
}

impl std::fmt::Display for AttainedClaim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AttainedClaim::NotAttained => "NotAttained",
            AttainedClaim::Attained => "Attained",
            AttainedClaim::Unknown => "Unknown",
        };
        write!(f, "{s}")
    }
}

/// A closed-form optimal constant together with its setting descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantResult {
    /// Floating-point value of the constant.
    pub value: f64,
    /// The same constant as an exact rational.
    pub exact: Rational,
    /// Which inequality/setting the constant belongs to (kebab-case label).
    pub setting: String,
    /// Whether the infimum defining the constant is attained.
    pub attained_claim: AttainedClaim,
}

impl ConstantResult {
    fn new(exact: Rational, setting: &str, attained_claim: AttainedClaim) -> Self {
        ConstantResult { value: to_f64(exact), exact, setting: setting.to_string(), attained_claim }
    }
}

/// Result of a one-dimensional optimization over the exponent of a power
/// ansatz.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaOptimum {
    /// Maximizing exponent.
    pub argmax: f64,
    /// Objective value at the maximizer.
    pub max_value: f64,
    /// Exact value when the maximizer is rational.
    pub exact_max: Option<Rational>,
    /// Feasible interval `[lo, hi]`; `None` means the whole real line.
    pub feasible_interval: Option<(f64, f64)>,
}

/// Which second-order setting a quadratic exponent optimization refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyVariant {
    /// Singularity in the interior: maximize `−α(α+d−2)`.
    Interior,
    /// Singularity on a flat boundary piece: maximize `−α(α+d)`.
    HalfSpace,
}

/// Where the singular poles of a multipolar weight sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// All poles interior to the whole space.
    InteriorWholeSpace,
    /// All poles on the boundary sphere of a ball (or a hyperplane).
    BoundaryBallOrHalfSpace,
}

/// `(d−2)²/4`: optimal constant of the second-order inequality with one
/// interior pole, `d >= 3`. Never attained.
pub fn hardy_interior_constant(d: Dimension) -> Result<ConstantResult> {
    d.require_at_least(3, "the interior second-order constant")?;
    let n = i64::from(d.get()) - 2;
    Ok(ConstantResult::new(q(n * n, 4), "hardy-interior", AttainedClaim::NotAttained))
}

/// `d²/4`: optimal constant when the pole sits on the boundary of a domain
/// contained in a half-space, `d >= 2`. Not attained in the energy space.
pub fn hardy_boundary_constant(d: Dimension) -> Result<ConstantResult> {
    let n = i64::from(d.get());
    Ok(ConstantResult::new(q(n * n, 4), "hardy-boundary", AttainedClaim::NotAttained))
}

/// Optimal constants for the multipolar product-form weight with `n` poles:
/// `(d−2)²/n²` for interior poles and `d²/n²` for boundary poles.
pub fn multipolar_constant(
    d: Dimension,
    n_poles: usize,
    placement: Placement,
) -> Result<ConstantResult> {
    if n_poles < 2 {
        return Err(Error::TooFewPoles { got: n_poles, min: 2 });
    }
    let n = n_poles as i64;
    match placement {
        Placement::InteriorWholeSpace => {
            d.require_at_least(3, "the interior multipolar constant")?;
            let base = i64::from(d.get()) - 2;
            let claim = if n_poles == 2 { AttainedClaim::NotAttained } else { AttainedClaim::Unknown };
            Ok(ConstantResult::new(q(base * base, n * n), "multipolar-interior", claim))
        }
        Placement::BoundaryBallOrHalfSpace => {
            let base = i64::from(d.get());
            let claim = if n_poles >= 3 { AttainedClaim::Attained } else { AttainedClaim::NotAttained };
            Ok(ConstantResult::new(q(base * base, n * n), "multipolar-boundary", claim))
        }
    }
}

/// Bracketing bounds for the multipolar constant in the regimes where it is
/// not known exactly: `((d−2)²/n², (d−2)²/(4n−4))` for interior poles
/// (`n >= 3`; for `n = 2` the constant is exact and this reports an error)
/// and `((d−2)²/n², d²/(4n−4))` for boundary poles (`n >= 2`). The lower
/// bound is strict, the upper bound is not.
pub fn multipolar_bounds(
    d: Dimension,
    n_poles: usize,
    placement: Placement,
) -> Result<(Rational, Rational)> {
    let n = n_poles as i64;
    match placement {
        Placement::InteriorWholeSpace => {
            if n_poles < 3 {
                return Err(Error::TooFewPoles { got: n_poles, min: 3 });
            }
            d.require_at_least(3, "interior multipolar bounds")?;
            let base = i64::from(d.get()) - 2;
            Ok((q(base * base, n * n), q(base * base, 4 * n - 4)))
        }
        Placement::BoundaryBallOrHalfSpace => {
            if n_poles < 2 {
                return Err(Error::TooFewPoles { got: n_poles, min: 2 });
            }
            let lo_base = i64::from(d.get()) - 2;
            let hi_base = i64::from(d.get());
            Ok((q(lo_base * lo_base, n * n), q(hi_base * hi_base, 4 * n - 4)))
        }
    }
}

/// `d²(d−4)²/16`: optimal constant of the fourth-order inequality with the
/// inverse-quartic weight, `d >= 5`.
pub fn rellich_constant(d: Dimension) -> Result<ConstantResult> {
    d.require_at_least(5, "the fourth-order constant")?;
    let n = i64::from(d.get());
    Ok(ConstantResult::new(q(n * n * (n - 4) * (n - 4), 16), "rellich", AttainedClaim::NotAttained))
}

/// The optimal constant in front of `∫|∇u|²/|x|²` as a lower bound for
/// `∫|Δu|²`: `d²/4` for `d >= 5`, `3` for `d = 4`, `25/36` for `d = 3`.
pub fn hardy_rellich_constant(d: Dimension) -> Result<ConstantResult> {
    d.require_at_least(3, "the mixed-order constant")?;
    let n = i64::from(d.get());
    let exact = match d.get() {
        3 => q(25, 36),
        4 => q(3, 1),
        _ => q(n * n, 4),
    };
    Ok(ConstantResult::new(exact, "hardy-rellich", AttainedClaim::NotAttained))
}

/// Maximizes the quadratic `−α(α+d−2)` (interior) or `−α(α+d)` (boundary
/// pole) over all real exponents. The vertex is the optimal power-ansatz
/// exponent and the maximum is the corresponding sharp constant.
pub fn maximize_hardy_quadratic(d: Dimension, variant: HardyVariant) -> Result<AlphaOptimum> {
    let shift = match variant {
        HardyVariant::Interior => {
            d.require_at_least(3, "the interior exponent optimization")?;
            i64::from(d.get()) - 2
        }
        HardyVariant::HalfSpace => i64::from(d.get()),
    };
    let argmax = q(-shift, 2);
    let max = q(shift * shift, 4);
    Ok(AlphaOptimum {
        argmax: to_f64(argmax),
        max_value: to_f64(max),
        exact_max: Some(max),
        feasible_interval: None,
    })
}

/// The quartic `f(α) = α(α−2)(d−2+α)(d−4+α)` appearing as the fourth-order
/// residual coefficient of the power ansatz `|x|^α`.
pub fn rellich_quartic(d: Dimension, alpha: f64) -> f64 {
    let df = d.as_f64();
    alpha * (alpha - 2.0) * (df - 2.0 + alpha) * (df - 4.0 + alpha)
}

fn rellich_quartic_exact(d: Dimension, alpha: Rational) -> Rational {
    let df = q(i64::from(d.get()), 1);
    alpha * (alpha - q(2, 1)) * (df - q(2, 1) + alpha) * (df - q(4, 1) + alpha)
}

/// The three stationary points of the quartic `f`, in increasing order:
/// `(−(d−4) ∓ √(d²−4d+8))/2` and `−(d−4)/2`.
pub fn rellich_critical_points(d: Dimension) -> Result<(f64, f64, f64)> {
    d.require_at_least(5, "the quartic stationary points")?;
    let df = d.as_f64();
    let disc = (df * df - 4.0 * df + 8.0).sqrt();
    let mid = -(df - 4.0) / 2.0;
    Ok((mid - disc / 2.0, mid, mid + disc / 2.0))
}

/// Maximizes the quartic `f` over the feasible exponent interval
/// `[−(d−2), 0]` (the exponents whose power ansatz has a nonnegative
/// second-order residual). Evaluates `f` at the interval endpoints and at
/// every stationary point inside the interval, and keeps the best.
pub fn maximize_rellich_quartic(d: Dimension) -> Result<AlphaOptimum> {
    d.require_at_least(5, "the quartic optimization")?;
    let lo = -(d.as_f64() - 2.0);
    let hi = 0.0;
    let (a1, a2, a3) = rellich_critical_points(d)?;

    // Rational candidates keep the reported maximum exact when they win.
    let mut candidates: Vec<(f64, Option<Rational>)> = vec![
        (lo, Some(q(-(i64::from(d.get()) - 2), 1))),
        (hi, Some(q(0, 1))),
        (a2, Some(q(-(i64::from(d.get()) - 4), 2))),
    ];
    for a in [a1, a3] {
        if a > lo && a < hi {
            candidates.push((a, None));
        }
    }

    let mut best = candidates[0].clone();
    let mut best_value = rellich_quartic(d, best.0);
    for c in &candidates[1..] {
        let v = rellich_quartic(d, c.0);
        if v > best_value {
            best_value = v;
            best = c.clone();
        }
    }
    let exact_max = best.1.map(|alpha| rellich_quartic_exact(d, alpha));
    let max_value = exact_max.map(to_f64).unwrap_or(best_value);
    Ok(AlphaOptimum { argmax: best.0, max_value, exact_max, feasible_interval: Some((lo, hi)) })
}

/// Sharp lower bound of the attractive-singularity Schrödinger form: the
/// infimum over `r > 0` of `μ*/r² − Z/r` with `μ* = (d−2)²/4`, namely
/// `−Z²/(4μ*) = −Z²/(d−2)²`, reached at `r* = 2μ*/Z`.
pub fn coulomb_lower_bound(d: Dimension, z: f64) -> Result<f64> {
    d.require_at_least(3, "the attractive-singularity lower bound")?;
    if !(z > 0.0) {
        return Err(Error::InvalidInput(format!("coupling must be positive, got {z}")));
    }
    let dm2 = d.as_f64() - 2.0;
    Ok(-(z * z) / (dm2 * dm2))
}

/// The ε-tradeoff of the mixed-order proof for `d >= 8`: minimizes
/// `f(ε) = (1/ε − 4)·4/d² + ε` over `ε ∈ (0, 1/4]`.
///
/// Returns the exact `(argmin, min value) = (2/d, 4(d−4)/d²)`.
pub fn hardy_rellich_epsilon_tradeoff(d: Dimension) -> Result<(Rational, Rational)> {
    d.require_at_least(8, "the ε-tradeoff argument")?;
    let n = i64::from(d.get());
    Ok((q(2, n), q(4 * (n - 4), n * n)))
}

/// The mixed-order constant this ε-argument proves: dividing the gradient
/// term's coefficient `(d−4)` by the minimal `f(ε)` gives
/// `(d−4)·d²/(4(d−4)) = d²/4` — matching the sharp constant for `d >= 5`.
pub fn epsilon_tradeoff_implied_constant(d: Dimension) -> Result<Rational> {
    let (_, min_value) = hardy_rellich_epsilon_tradeoff(d)?;
    let n = i64::from(d.get());
    Ok(q(n - 4, 1) / min_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn interior_constant_values() {
        assert_eq!(hardy_interior_constant(dim(3)).unwrap().value, 0.25);
        assert_eq!(hardy_interior_constant(dim(4)).unwrap().value, 1.0);
        assert_eq!(hardy_interior_constant(dim(3)).unwrap().exact, q(1, 4));
        assert!(matches!(
            hardy_interior_constant(dim(2)),
            Err(Error::DimensionTooSmall { d: 2, min: 3, .. })
        ));
    }

    #[test]
    fn boundary_constant_values() {
        assert_eq!(hardy_boundary_constant(dim(2)).unwrap().value, 1.0);
        assert_eq!(hardy_boundary_constant(dim(3)).unwrap().value, 2.25);
        assert_eq!(hardy_boundary_constant(dim(10)).unwrap().value, 25.0);
    }

    #[test]
    fn multipolar_constant_values_and_claims() {
        let c = multipolar_constant(dim(3), 2, Placement::InteriorWholeSpace).unwrap();
        assert_eq!(c.value, 0.25);
        assert_eq!(c.attained_claim, AttainedClaim::NotAttained);

        let c = multipolar_constant(dim(3), 3, Placement::BoundaryBallOrHalfSpace).unwrap();
        assert_eq!(c.value, 1.0);
        assert_eq!(c.attained_claim, AttainedClaim::Attained);

        let c = multipolar_constant(dim(4), 2, Placement::BoundaryBallOrHalfSpace).unwrap();
        assert_eq!(c.value, 4.0);
        assert_eq!(c.attained_claim, AttainedClaim::NotAttained);

        let c = multipolar_constant(dim(5), 4, Placement::InteriorWholeSpace).unwrap();
        assert_eq!(c.attained_claim, AttainedClaim::Unknown);

        assert!(matches!(
            multipolar_constant(dim(3), 1, Placement::InteriorWholeSpace),
            Err(Error::TooFewPoles { .. })
        ));
    }

    #[test]
    fn multipolar_bound_values() {
        let (lo, hi) = multipolar_bounds(dim(3), 3, Placement::InteriorWholeSpace).unwrap();
        assert_eq!((lo, hi), (q(1, 9), q(1, 8)));

        let (lo, hi) = multipolar_bounds(dim(3), 2, Placement::BoundaryBallOrHalfSpace).unwrap();
        assert_eq!((to_f64(lo), to_f64(hi)), (0.25, 2.25));

        let (lo, hi) = multipolar_bounds(dim(5), 5, Placement::InteriorWholeSpace).unwrap();
        assert_eq!((lo, hi), (q(9, 25), q(9, 16)));

        assert!(multipolar_bounds(dim(3), 2, Placement::InteriorWholeSpace).is_err());
    }

    #[test]
    fn bounds_bracket_strictly() {
        for d in 3..=8u32 {
            for n in 2..=6usize {
                for placement in [Placement::InteriorWholeSpace, Placement::BoundaryBallOrHalfSpace]
                {
                    if let Ok((lo, hi)) = multipolar_bounds(dim(d), n, placement) {
                        assert!(lo < hi, "d={d} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn fourth_order_constant_values() {
        assert_eq!(rellich_constant(dim(5)).unwrap().exact, q(25, 16));
        assert_eq!(rellich_constant(dim(6)).unwrap().value, 9.0);
        assert!(matches!(
            rellich_constant(dim(4)),
            Err(Error::DimensionTooSmall { d: 4, min: 5, .. })
        ));
    }

    #[test]
    fn mixed_order_constant_values() {
        assert_eq!(hardy_rellich_constant(dim(3)).unwrap().exact, q(25, 36));
        assert_eq!(hardy_rellich_constant(dim(4)).unwrap().value, 3.0);
        assert_eq!(hardy_rellich_constant(dim(7)).unwrap().value, 12.25);
    }

    #[test]
    fn quadratic_optimization_values() {
        let o = maximize_hardy_quadratic(dim(4), HardyVariant::Interior).unwrap();
        assert_eq!((o.argmax, o.max_value), (-1.0, 1.0));

        let o = maximize_hardy_quadratic(dim(3), HardyVariant::HalfSpace).unwrap();
        assert_eq!((o.argmax, o.max_value), (-1.5, 2.25));

        let o = maximize_hardy_quadratic(dim(3), HardyVariant::Interior).unwrap();
        assert_eq!((o.argmax, o.max_value), (-0.5, 0.25));
        assert!(o.feasible_interval.is_none());
    }

    #[test]
    fn quadratic_matches_interior_constant() {
        for d in 3..=10u32 {
            let o = maximize_hardy_quadratic(dim(d), HardyVariant::Interior).unwrap();
            let c = hardy_interior_constant(dim(d)).unwrap();
            assert_eq!(o.exact_max.unwrap(), c.exact);
        }
    }

    #[test]
    fn quartic_optimization_values() {
        let o = maximize_rellich_quartic(dim(5)).unwrap();
        assert_eq!(o.argmax, -0.5);
        assert_eq!(o.exact_max.unwrap(), q(25, 16));
        assert_eq!(o.feasible_interval, Some((-3.0, 0.0)));

        let o = maximize_rellich_quartic(dim(6)).unwrap();
        assert_eq!((o.argmax, o.max_value), (-1.0, 9.0));
    }

    #[test]
    fn quartic_matches_fourth_order_constant_exactly() {
        for d in 5..=12u32 {
            let o = maximize_rellich_quartic(dim(d)).unwrap();
            let c = rellich_constant(dim(d)).unwrap();
            assert_eq!(o.exact_max.unwrap(), c.exact, "d={d}");
        }
    }

    #[test]
    fn critical_points_match_closed_forms() {
        let (a1, a2, a3) = rellich_critical_points(dim(5)).unwrap();
        let root13 = 13.0f64.sqrt();
        assert!((a1 - (-1.0 - root13) / 2.0).abs() <= 1e-12);
        assert_eq!(a2, -0.5);
        assert!((a3 - (-1.0 + root13) / 2.0).abs() <= 1e-12);
        assert!(a1 < a2 && a2 < a3);
    }

    #[test]
    fn critical_points_are_stationary() {
        // f'(α) via the product rule, written independently of the roots.
        let fprime = |d: f64, a: f64| {
            (a - 2.0) * (d - 2.0 + a) * (d - 4.0 + a)
                + a * (d - 2.0 + a) * (d - 4.0 + a)
                + a * (a - 2.0) * (d - 4.0 + a)
                + a * (a - 2.0) * (d - 2.0 + a)
        };
        for d in 5..=12u32 {
            let (a1, a2, a3) = rellich_critical_points(dim(d)).unwrap();
            for a in [a1, a2, a3] {
                assert!(fprime(f64::from(d), a).abs() <= 1e-10, "d={d}, α={a}");
            }
        }
    }

    #[test]
    fn quartic_roots_are_exact() {
        for d in 5..=12u32 {
            let df = f64::from(d);
            for alpha in [0.0, 2.0, -(df - 2.0), -(df - 4.0)] {
                assert_eq!(rellich_quartic(dim(d), alpha), 0.0);
            }
        }
    }

    #[test]
    fn quartic_grid_search_agrees() {
        // Coarse dense search over the feasible interval as a cross-check.
        for d in [5u32, 7, 9] {
            let o = maximize_rellich_quartic(dim(d)).unwrap();
            let (lo, hi) = o.feasible_interval.unwrap();
            let mut best = f64::NEG_INFINITY;
            let n = 20_000;
            for i in 0..=n {
                let a = lo + (hi - lo) * (i as f64) / (n as f64);
                best = best.max(rellich_quartic(dim(d), a));
            }
            assert!((best - o.max_value).abs() <= 1e-6 * o.max_value.max(1.0));
        }
    }

    #[test]
    fn attractive_singularity_bound_values() {
        assert_eq!(coulomb_lower_bound(dim(3), 1.0).unwrap(), -1.0);
        assert_eq!(coulomb_lower_bound(dim(4), 2.0).unwrap(), -1.0);
    }

    #[test]
    fn attractive_singularity_bound_is_stationary_value() {
        for (d, z) in [(3u32, 0.7), (5, 2.3), (9, 11.0)] {
            let mu = hardy_interior_constant(dim(d)).unwrap().value;
            let r_star = 2.0 * mu / z;
            let at_star = mu / (r_star * r_star) - z / r_star;
            let bound = coulomb_lower_bound(dim(d), z).unwrap();
            assert!((bound - at_star).abs() <= 1e-12 * bound.abs().max(1.0));
        }
    }

    #[test]
    fn attractive_singularity_bound_is_quadratic_in_coupling() {
        for lambda in [0.5, 3.0, 11.25] {
            let v1 = coulomb_lower_bound(dim(5), 1.3).unwrap();
            let v2 = coulomb_lower_bound(dim(5), 1.3 * lambda).unwrap();
            assert!((v2 - lambda * lambda * v1).abs() <= 1e-10 * v2.abs());
        }
    }

    #[test]
    fn epsilon_tradeoff_values() {
        assert_eq!(hardy_rellich_epsilon_tradeoff(dim(8)).unwrap(), (q(1, 4), q(1, 4)));
        assert_eq!(hardy_rellich_epsilon_tradeoff(dim(10)).unwrap(), (q(1, 5), q(6, 25)));
        assert!(matches!(
            hardy_rellich_epsilon_tradeoff(dim(7)),
            Err(Error::DimensionTooSmall { .. })
        ));
    }

    #[test]
    fn epsilon_tradeoff_minimum_is_interior_minimum() {
        // The argmin must beat a dense scan of f(ε) over (0, 1/4].
        for d in 8..=12u32 {
            let (argmin, min_value) = hardy_rellich_epsilon_tradeoff(dim(d)).unwrap();
            let df = f64::from(d);
            let f = |eps: f64| (1.0 / eps - 4.0) * 4.0 / (df * df) + eps;
            let mut best = f64::INFINITY;
            for i in 1..=25_000 {
                best = best.min(f(0.25 * (i as f64) / 25_000.0));
            }
            assert!((to_f64(min_value) - best).abs() <= 1e-9);
            // The exact argmin lies between grid points, so it can only
            // undercut the scan, never exceed it.
            assert!(f(to_f64(argmin)) <= best + 1e-12);
        }
    }

    #[test]
    fn epsilon_tradeoff_implies_the_sharp_constant() {
        for d in 8..=12u32 {
            let implied = epsilon_tradeoff_implied_constant(dim(d)).unwrap();
            let n = i64::from(d);
            assert_eq!(implied, q(n * n, 4), "d={d}");
        }
    }

    #[test]
    fn interior_constant_below_boundary_constant() {
        for d in 3..=12u32 {
            let interior = hardy_interior_constant(dim(d)).unwrap().exact;
            let boundary = hardy_boundary_constant(dim(d)).unwrap().exact;
            assert!(interior < boundary);
        }
    }
}
