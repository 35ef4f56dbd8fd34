//! Rayleigh quotients of the explicit minimizing families.
//!
//! Each family of test functions depends on a parameter ε > 0; as ε shrinks
//! the quotient of the two energy integrals decreases toward the sharp
//! constant of its setting. Quotients are evaluated semi-analytically:
//! radial reduction with exact angular factors, closed forms wherever the
//! profile is an exact power, and adaptive 1-D quadrature elsewhere. The
//! ball-minimizer quotient, which has no radial reduction, goes through
//! seeded Monte Carlo with pole exclusions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dimension, Point, PoleSet};
use crate::quadrature::{
    angular_moment, integrate_1d, sphere_area, AngularMoment, BoxDomain, Exclusion,
    IntegralResult, McPlan,
};

/// Fraction of the ball radius excluded around each boundary pole of the
/// ball minimizer. Larger than the generic default on purpose: the
/// integrands grow like `ρ^{−2d/n}` at the poles, and a tighter exclusion
/// sends the sampling variance through the roof while the analytic
/// power-law reconstruction of the excluded mass stays accurate.
pub const BALL_POLE_EXCLUSION_FRACTION: f64 = 5e-3;

/// Value, first, and second derivative of a cutoff at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffJet {
    pub theta: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Radial cutoff profile: ≡ 1 on `[0, R]`, ≡ 0 on `[2R, ∞)`, with a smooth
/// transition on `[R, 2R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CutoffSpec {
    /// Infinitely smooth bump-exponential transition; all derivatives
    /// vanish at both junctions.
    SmoothBump { radius: f64 },
    /// Polynomial smoothstep transition of the given order (1 ⇒ C¹ cubic,
    /// 2 ⇒ C² quintic, 3 ⇒ C³ septic).
    PolySmoothstep { radius: f64, order: u32 },
}

impl CutoffSpec {
    /// The default profile: infinitely smooth with unit plateau radius —
    /// second derivatives of the cutoff enter fourth-order numerators, so
    /// junction smoothness matters.
    pub fn default_bump() -> Self {
        CutoffSpec::SmoothBump { radius: 1.0 }
    }

    pub fn radius(&self) -> f64 {
        match self {
            CutoffSpec::SmoothBump { radius } | CutoffSpec::PolySmoothstep { radius, .. } => *radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff radius must be positive, got {r}")));
        }
        if let CutoffSpec::PolySmoothstep { order, .. } = self {
            if !(1..=3).contains(order) {
                return Err(Error::InvalidInput(format!(
                    "smoothstep order must be 1, 2, or 3, got {order}"
                )));
            }
        }
        Ok(())
    }

    /// Value and first two derivatives with respect to `r`.
    pub fn jet(&self, r: f64) -> CutoffJet {
        let big_r = self.radius();
        if r <= big_r {
            return CutoffJet { theta: 1.0, d1: 0.0, d2: 0.0 };
        }
        if r >= 2.0 * big_r {
            return CutoffJet { theta: 0.0, d1: 0.0, d2: 0.0 };
        }
        let u = (r - big_r) / big_r;
        let jet_u = match self {
            CutoffSpec::SmoothBump { .. } => bump_jet(u),
            CutoffSpec::PolySmoothstep { order, .. } => smoothstep_jet(u, *order),
        };
        CutoffJet {
            theta: jet_u.theta,
            d1: jet_u.d1 / big_r,
            d2: jet_u.d2 / (big_r * big_r),
        }
    }
}

/// Jet of the bump-exponential partition θ(u) = a/(a+b) with a = e^{−1/(1−u)},
/// b = e^{−1/u}, expressed in the transition variable u ∈ (0, 1).
fn bump_jet(u: f64) -> CutoffJet {
    // Clamp tails where one side has underflowed anyway.
    if u <= 1e-6 {
        return CutoffJet { theta: 1.0, d1: 0.0, d2: 0.0 };
    }
    if u >= 1.0 - 1e-6 {
        return CutoffJet { theta: 0.0, d1: 0.0, d2: 0.0 };
    }
    let v = 1.0 - u;
    let a = (-1.0 / v).exp();
    let b = (-1.0 / u).exp();
    let ap = -a / (v * v);
    let bp = b / (u * u);
    let app = a * (1.0 / (v * v * v * v) - 2.0 / (v * v * v));
    let bpp = b * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
    let s = a + b;
    let n1 = ap * b - a * bp;
    let theta = a / s;
    let d1 = n1 / (s * s);
    let d2 = ((app * b - a * bpp) * s - 2.0 * n1 * (ap + bp)) / (s * s * s);
    CutoffJet { theta, d1, d2 }
}

/// Jet of θ(u) = 1 − S_k(u) for the classic smoothstep polynomials.
fn smoothstep_jet(u: f64, order: u32) -> CutoffJet {
    let (s, s1, s2) = match order {
        1 => (
            u * u * (3.0 - 2.0 * u),
            6.0 * u - 6.0 * u * u,
            6.0 - 12.0 * u,
        ),
        2 => (
            u * u * u * (10.0 - 15.0 * u + 6.0 * u * u),
            30.0 * u * u - 60.0 * u * u * u + 30.0 * u * u * u * u,
            60.0 * u - 180.0 * u * u + 120.0 * u * u * u,
        ),
        3 => {
            let u2 = u * u;
            let u3 = u2 * u;
            (
                35.0 * u2 * u2 - 84.0 * u2 * u3 + 70.0 * u3 * u3 - 20.0 * u3 * u3 * u,
                140.0 * u3 - 420.0 * u2 * u2 + 420.0 * u2 * u3 - 140.0 * u3 * u3,
                420.0 * u2 - 1680.0 * u3 + 2100.0 * u2 * u2 - 840.0 * u2 * u3,
            )
        }
        _ => unreachable!("validated orders are 1..=3"),
    };
    CutoffJet { theta: 1.0 - s, d1: -s1, d2: -s2 }
}

/// A degree-1 spherical harmonic `φ₁(σ) = normalization · (σ·direction)`
/// normalized to unit L² norm on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalHarmonicDeg1 {
    pub direction: Point,
    pub normalization: f64,
}

impl SphericalHarmonicDeg1 {
    pub fn along(d: Dimension, direction: Point) -> Result<Self> {
        direction.check_dim(d)?;
        let norm = direction.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("harmonic direction must be nonzero".into()));
        }
        let unit = Point(direction.coords().iter().map(|c| c / norm).collect());
        // ∫_{S^{d−1}} (σ·e)² dσ = area/d, so the unit-norm scaling is √(d/area).
        let normalization = (d.as_f64() / sphere_area(d)).sqrt();
        Ok(SphericalHarmonicDeg1 { direction: unit, normalization })
    }

    /// Last-axis harmonic, the conventional representative.
    pub fn last_axis(d: Dimension) -> Self {
        Self::along(d, Point::last_axis(d)).expect("unit axis is a valid direction")
    }
}

/// Which minimizing family a sweep runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Interior-pole second-order family `(|x|²+ε²)^{−(d−2)/4}θ(|x|)`.
    HardyInterior,
    /// Flat-boundary family: `x_d` inside the unit ball, decaying power tail
    /// outside.
    HalfSpace,
    /// Mixed-order family `|x|^{−(d−4)/2+ε}θ(|x|)`, carrying a degree-1
    /// spherical harmonic factor in dimensions 3 and 4.
    HardyRellich,
}

/// A minimizing family with its dimension and profile choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizingFamily {
    pub kind: FamilyKind,
    pub d: Dimension,
    pub cutoff: CutoffSpec,
    /// Required exactly when `kind` is the mixed-order family in d ∈ {3, 4}.
    #[serde(default)]
    pub harmonic: Option<SphericalHarmonicDeg1>,
}

impl MinimizingFamily {
    pub fn new(kind: FamilyKind, d: Dimension, cutoff: CutoffSpec) -> Result<Self> {
        let harmonic = match kind {
            FamilyKind::HardyRellich if d.get() <= 4 => Some(SphericalHarmonicDeg1::last_axis(d)),
            _ => None,
        };
        let fam = MinimizingFamily { kind, d, cutoff, harmonic };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        self.cutoff.validate()?;
        match self.kind {
            FamilyKind::HardyInterior => {
                self.d.require_at_least(3, "the interior minimizing family")?;
                if self.harmonic.is_some() {
                    return Err(Error::InvalidInput(
                        "the interior family carries no spherical harmonic".into(),
                    ));
                }
            }
            FamilyKind::HalfSpace => {
                if self.harmonic.is_some() {
                    return Err(Error::InvalidInput(
                        "the flat-boundary family carries no spherical harmonic".into(),
                    ));
                }
            }
            FamilyKind::HardyRellich => {
                self.d.require_at_least(3, "the mixed-order minimizing family")?;
                let needs_harmonic = self.d.get() <= 4;
                if needs_harmonic != self.harmonic.is_some() {
                    return Err(Error::InvalidInput(format!(
                        "the mixed-order family requires a degree-1 harmonic exactly in \
                         dimensions 3 and 4 (d = {}, harmonic given: {})",
                        self.d.get(),
                        self.harmonic.is_some()
                    )));
                }
                if let Some(h) = &self.harmonic {
                    h.direction.check_dim(self.d)?;
                }
            }
        }
        Ok(())
    }

    /// Evaluate the family's quotient at one parameter value.
    pub fn quotient(&self, eps: f64) -> Result<QuotientReport> {
        self.validate()?;
        match self.kind {
            FamilyKind::HardyInterior => quotient_hardy_interior(self.d, eps, &self.cutoff),
            FamilyKind::HalfSpace => quotient_halfspace(self.d, eps),
            FamilyKind::HardyRellich => {
                quotient_hardy_rellich(self.d, eps, &self.cutoff, self.harmonic.as_ref())
            }
        }
    }
}

/// Both energy integrals and their ratio at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientReport {
    pub numerator: IntegralResult,
    pub denominator: IntegralResult,
    pub quotient: f64,
    pub epsilon: f64,
}

impl QuotientReport {
    fn new(numerator: IntegralResult, denominator: IntegralResult, epsilon: f64) -> Result<Self> {
        if !(denominator.value > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "denominator integral is not positive ({})",
                denominator.value
            )));
        }
        let quotient = numerator.value / denominator.value;
        Ok(QuotientReport { numerator, denominator, quotient, epsilon })
    }

    /// Combined relative error bar of the quotient.
    pub fn relative_error(&self) -> f64 {
        let n = self.numerator.error_estimate / self.numerator.value.abs().max(f64::MIN_POSITIVE);
        let d =
            self.denominator.error_estimate / self.denominator.value.abs().max(f64::MIN_POSITIVE);
        n + d
    }
}

/// Quotient `∫|∇u|² / ∫u²/|x|²` for the interior-pole family
/// `u(x) = (|x|²+ε²)^{−(d−2)/4} θ(|x|)` — strictly above `(d−2)²/4`,
/// decreasing as ε ↓ 0.
pub fn quotient_hardy_interior(d: Dimension, eps: f64, cutoff: &CutoffSpec) -> Result<QuotientReport> {
    d.require_at_least(3, "the interior minimizing family")?;
    cutoff.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("ε must be positive, got {eps}")));
    }
    let df = d.as_f64();
    let p = -(df - 2.0) / 4.0;
    let hi = 2.0 * cutoff.radius();
    let area = sphere_area(d);
    let tol = 1e-10;

    let profile = |r: f64| -> (f64, f64) {
        let q = r * r + eps * eps;
        let g = q.powf(p);
        let gp = 2.0 * p * r * q.powf(p - 1.0);
        let jet = cutoff.jet(r);
        (g * jet.theta, gp * jet.theta + g * jet.d1)
    };

    let numerator = integrate_1d(
        |r| {
            let (_, up) = profile(r);
            up * up * r.powf(df - 1.0)
        },
        0.0,
        hi,
        tol,
    )?
    .scaled_by(area);
    let denominator = integrate_1d(
        |r| {
            let (u, _) = profile(r);
            u * u * r.powf(df - 3.0)
        },
        0.0,
        hi,
        tol,
    )?
    .scaled_by(area);
    QuotientReport::new(numerator, denominator, eps)
}

/// `∫₁^∞ r^p dr` for `p < −1`, via `r = e^s` composed with `s = t/(1−t)`.
///
/// A direct algebraic map of the tail would leave a `(1−t)^{−(p+2)}`-type
/// endpoint singularity carrying most of the mass, which adaptive bisection
/// cannot resolve to tight tolerances for `p` near −1; the exponential
/// substitution turns the tail into a clean decaying exponential.
fn power_tail_integral(p: f64, tol: f64) -> Result<IntegralResult> {
    if p >= -1.0 {
        return Err(Error::NonIntegrable(format!("tail exponent {p} diverges at infinity")));
    }
    integrate_1d(
        |t| {
            let om = 1.0 - t;
            let s = t / om;
            ((p + 1.0) * s).exp() / (om * om)
        },
        0.0,
        1.0,
        tol,
    )
}

/// Closed-form inner-ball contributions of the flat-boundary family
/// (`u = x_d` on the unit half-ball): numerator = half-ball volume,
/// denominator = `∫ x_d²/|x|²`.
pub fn halfspace_inner_parts(d: Dimension) -> (f64, f64) {
    // |∇x_d|² ≡ 1, so the numerator is the half-ball volume.
    let num = angular_moment(d, AngularMoment::HalfSphereOne) / d.as_f64();
    let den = angular_moment(d, AngularMoment::HalfSphereLastCoordSquared) / d.as_f64();
    (num, den)
}

/// Quotient for the flat-boundary family: `u = x_d` inside the unit ball
/// and `x_d |x|^{−d/2−ε}` outside, glued continuously. Exactly
/// `d²/4 + (d/2)ε`, decreasing to `d²/4`.
///
/// The decay exponent is taken strictly below `−d/2` so both energy
/// integrals converge; nonpositive ε leaves the energy space.
pub fn quotient_halfspace(d: Dimension, eps: f64) -> Result<QuotientReport> {
    if !(eps > 0.0) {
        return Err(Error::NonIntegrable(format!(
            "decay parameter must be positive for finite energy, got {eps}"
        )));
    }
    let df = d.as_f64();
    let beta = -df / 2.0 - eps;
    let half_all = angular_moment(d, AngularMoment::HalfSphereOne);
    let half_sq = angular_moment(d, AngularMoment::HalfSphereLastCoordSquared);
    let (num_inner, den_inner) = halfspace_inner_parts(d);

    // Both outer integrals share the same radial tail ∫₁^∞ r^{−1−2ε} dr.
    let tail = power_tail_integral(2.0 * beta + df - 1.0, 1e-11)?;
    let num_outer = tail.scaled_by(half_all + beta * (beta + 2.0) * half_sq);
    let den_outer = tail.scaled_by(half_sq);

    let numerator = IntegralResult { value: num_inner, error_estimate: 0.0, evaluations: 0 }
        .combined_with(&num_outer);
    let denominator = IntegralResult { value: den_inner, error_estimate: 0.0, evaluations: 0 }
        .combined_with(&den_outer);
    QuotientReport::new(numerator, denominator, eps)
}

/// Quotient `∫|Δu|² / ∫|∇u|²/|x|²` for the mixed-order family
/// `u = |x|^{−(d−4)/2+ε} θ(|x|)` (times a degree-1 spherical harmonic in
/// d ∈ {3, 4}). Decreases to d²/4 for d ≥ 5, to 3 for d = 4, to 25/36 for
/// d = 3.
pub fn quotient_hardy_rellich(
    d: Dimension,
    eps: f64,
    cutoff: &CutoffSpec,
    harmonic: Option<&SphericalHarmonicDeg1>,
) -> Result<QuotientReport> {
    d.require_at_least(3, "the mixed-order minimizing family")?;
    cutoff.validate()?;
    let needs_harmonic = d.get() <= 4;
    if needs_harmonic != harmonic.is_some() {
        return Err(Error::InvalidInput(format!(
            "a degree-1 harmonic is required exactly in dimensions 3 and 4 (d = {})",
            d.get()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::NonIntegrable(format!(
            "both integrals diverge at the origin unless ε > 0, got {eps}"
        )));
    }
    let df = d.as_f64();
    let a = -(df - 4.0) / 2.0 + eps;
    let lambda = if needs_harmonic { df - 1.0 } else { 0.0 };
    // Angular factor: the harmonic is unit-normalized, the radial case
    // carries the full sphere measure.
    let angular = if needs_harmonic { 1.0 } else { sphere_area(d) };

    // On [0, R] the profile is the exact power r^a: both radial integrands
    // are exact powers r^{2ε−1} whose mass near 0 no bisection strategy can
    // chase for small ε, so that part is integrated in closed form.
    let big_r = cutoff.radius();
    let c = a * (a - 1.0) + (df - 1.0) * a - lambda;
    let core_scale = big_r.powf(2.0 * eps) / (2.0 * eps);
    let num_core = c * c * core_scale;
    let den_core = (a * a + lambda) * core_scale;

    let tol = 1e-10;
    let f_jet = |r: f64| -> (f64, f64, f64) {
        let jet = cutoff.jet(r);
        let ra = r.powf(a);
        let f = ra * jet.theta;
        let fp = a * r.powf(a - 1.0) * jet.theta + ra * jet.d1;
        let fpp = a * (a - 1.0) * r.powf(a - 2.0) * jet.theta
            + 2.0 * a * r.powf(a - 1.0) * jet.d1
            + ra * jet.d2;
        (f, fp, fpp)
    };
    let num_tail = integrate_1d(
        |r| {
            let (f, fp, fpp) = f_jet(r);
            let lap = fpp + (df - 1.0) * fp / r - lambda * f / (r * r);
            lap * lap * r.powf(df - 1.0)
        },
        big_r,
        2.0 * big_r,
        tol,
    )?;
    let den_tail = integrate_1d(
        |r| {
            let (f, fp, _) = f_jet(r);
            (fp * fp + lambda * f * f / (r * r)) * r.powf(df - 3.0)
        },
        big_r,
        2.0 * big_r,
        tol,
    )?;

    let numerator = IntegralResult { value: num_core, error_estimate: 0.0, evaluations: 0 }
        .combined_with(&num_tail)
        .scaled_by(angular);
    let denominator = IntegralResult { value: den_core, error_estimate: 0.0, evaluations: 0 }
        .combined_with(&den_tail)
        .scaled_by(angular);
    QuotientReport::new(numerator, denominator, eps)
}

/// Quotient of the explicit ball minimizer
/// `φ = (r²−|x−c|²)·∏|x−aᵢ|^{−d/n}` over a ball with n ≥ 3 poles on its
/// boundary sphere: `∫|∇φ|² / ∫Vφ²` with the pairwise product weight V.
/// Expected value `d²/n²`.
pub fn quotient_multipolar_ball_minimizer(
    center: &Point,
    radius: f64,
    poles: &PoleSet,
    plan: &McPlan,
) -> Result<QuotientReport> {
    let d = Dimension::new(poles.dim() as u32)?;
    center.check_dim(d)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("ball radius must be positive, got {radius}")));
    }
    let n = poles.n();
    if n < 3 {
        return Err(Error::NonIntegrable(format!(
            "the ball minimizer has infinite energy with {n} poles; at least 3 are needed"
        )));
    }
    for pole in poles.poles() {
        if (pole.dist(center) - radius).abs() > 1e-9 * radius {
            return Err(Error::InvalidInput(format!(
                "pole {:?} does not lie on the boundary sphere",
                pole.coords()
            )));
        }
    }

    let df = d.as_f64();
    let nf = n as f64;
    let pole_coords: Vec<&[f64]> = poles.poles().iter().map(|p| p.coords()).collect();
    let ctr = center.coords();
    let r2 = radius * radius;
    let exclusion_radius = BALL_POLE_EXCLUSION_FRACTION * radius;
    // Both integrands scale like dist^{−2d/n} at a boundary pole: the ball
    // weight vanishes linearly there, canceling one inverse power in the
    // gradient and producing the same local law in the weighted square.
    let local_exponent = -2.0 * df / nf;
    let exclusions: Vec<Exclusion> = poles
        .poles()
        .iter()
        .map(|p| Exclusion {
            center: p.clone(),
            radius: exclusion_radius,
            exponent: Some(local_exponent),
        })
        .collect();
    let domain = BoxDomain::cube(center, radius)?;

    let gradient_sq = |x: &[f64]| -> f64 {
        let mut dist2c = 0.0;
        for (xk, ck) in x.iter().zip(ctr) {
            dist2c += (xk - ck) * (xk - ck);
        }
        if dist2c >= r2 {
            return 0.0;
        }
        let w = r2 - dist2c;
        let mut log_p = 0.0;
        let mut s = vec![0.0_f64; x.len()];
        for pc in &pole_coords {
            let mut d2 = 0.0;
            for (xk, ak) in x.iter().zip(pc.iter()) {
                d2 += (xk - ak) * (xk - ak);
            }
            log_p += (-df / nf) * 0.5 * d2.ln();
            for (k, (xk, ak)) in x.iter().zip(pc.iter()).enumerate() {
                s[k] += (-df / nf) * (xk - ak) / d2;
            }
        }
        let p = log_p.exp();
        let mut grad2 = 0.0;
        for (k, sk) in s.iter().enumerate() {
            let gk = p * (-2.0 * (x[k] - ctr[k]) + w * sk);
            grad2 += gk * gk;
        }
        grad2
    };

    let weighted_sq = |x: &[f64]| -> f64 {
        let mut dist2c = 0.0;
        for (xk, ck) in x.iter().zip(ctr) {
            dist2c += (xk - ck) * (xk - ck);
        }
        if dist2c >= r2 {
            return 0.0;
        }
        let w = r2 - dist2c;
        let mut log_p = 0.0;
        let mut d2s = vec![0.0_f64; pole_coords.len()];
        for (i, pc) in pole_coords.iter().enumerate() {
            let mut d2 = 0.0;
            for (xk, ak) in x.iter().zip(pc.iter()) {
                d2 += (xk - ak) * (xk - ak);
            }
            d2s[i] = d2;
            log_p += (-df / nf) * 0.5 * d2.ln();
        }
        let phi = w * log_p.exp();
        let mut v = 0.0;
        for i in 0..d2s.len() {
            for j in (i + 1)..d2s.len() {
                let mut sep2 = 0.0;
                for (ai, aj) in pole_coords[i].iter().zip(pole_coords[j].iter()) {
                    sep2 += (ai - aj) * (ai - aj);
                }
                v += sep2 / (d2s[i] * d2s[j]);
            }
        }
        v * phi * phi
    };

    let numerator = crate::quadrature::integrate_nd(&gradient_sq, &domain, &exclusions, plan)?;
    let denominator = crate::quadrature::integrate_nd(
        &weighted_sq,
        &domain,
        &exclusions,
        &McPlan { samples: plan.samples, seed: plan.seed.wrapping_add(1) },
    )?;
    let mut report = QuotientReport::new(numerator, denominator, 0.0)?;
    report.epsilon = f64::NAN;
    Ok(report)
}

/// A parameter sweep with its extrapolated limit and monotonicity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub reports: Vec<QuotientReport>,
    pub extrapolated_limit: f64,
    pub monotone: bool,
}

/// Solve a 3×3 linear system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in (col + 1)..3 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Fit q(ε) ≈ (μ + bε)/(1 + cε) through the last three sweep points and
/// return μ. Exact for quotients that are affine or first-order rational in
/// ε, which covers the boundary and mixed-order families.
fn rational_limit(reports: &[QuotientReport]) -> Option<f64> {
    if reports.len() < 3 {
        return None;
    }
    let last = &reports[reports.len() - 3..];
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (i, rep) in last.iter().enumerate() {
        a[i] = [1.0, rep.epsilon, -rep.quotient * rep.epsilon];
        rhs[i] = rep.quotient;
    }
    solve3(a, rhs).map(|x| x[0])
}

/// Extrapolate the interior family, whose energies grow like
/// `const + slope·ln(1/ε)` with slope ratio equal to the limiting constant:
/// fit both integrals linearly in `ln(1/ε)` over the last three points and
/// return the slope ratio.
fn log_slope_limit(reports: &[QuotientReport]) -> Option<f64> {
    if reports.len() < 3 {
        return None;
    }
    let last = &reports[reports.len() - 3..];
    let ls: Vec<f64> = last.iter().map(|r| (1.0 / r.epsilon).ln()).collect();
    let mean_l = ls.iter().sum::<f64>() / 3.0;
    let var_l: f64 = ls.iter().map(|l| (l - mean_l) * (l - mean_l)).sum();
    if var_l < 1e-20 {
        return None;
    }
    let slope = |ys: Vec<f64>| -> f64 {
        let mean_y = ys.iter().sum::<f64>() / 3.0;
        ls.iter().zip(&ys).map(|(l, y)| (l - mean_l) * (y - mean_y)).sum::<f64>() / var_l
    };
    let slope_n = slope(last.iter().map(|r| r.numerator.value).collect());
    let slope_d = slope(last.iter().map(|r| r.denominator.value).collect());
    if slope_d.abs() < 1e-300 {
        return None;
    }
    Some(slope_n / slope_d)
}

/// Evaluate a family along a strictly decreasing ε list, reporting each
/// quotient, a per-family extrapolated limit, and whether the quotients
/// decreased monotonically.
pub fn sweep(family: &MinimizingFamily, eps_list: &[f64]) -> Result<SweepResult> {
    family.validate()?;
    if eps_list.is_empty() {
        return Err(Error::InvalidInput("ε list must be non-empty".into()));
    }
    for pair in eps_list.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidInput(format!(
                "ε list must be strictly decreasing, got {} before {}",
                pair[0], pair[1]
            )));
        }
    }
    if !(eps_list[eps_list.len() - 1] > 0.0) {
        return Err(Error::InvalidInput("every ε must be positive".into()));
    }

    let reports: Vec<QuotientReport> = eps_list
        .par_iter()
        .map(|&eps| family.quotient(eps))
        .collect::<Result<Vec<_>>>()?;

    let monotone = reports.windows(2).all(|w| w[1].quotient < w[0].quotient);
    let fallback = reports[reports.len() - 1].quotient;
    let extrapolated_limit = match family.kind {
        FamilyKind::HardyInterior => log_slope_limit(&reports),
        FamilyKind::HalfSpace | FamilyKind::HardyRellich => rational_limit(&reports),
    }
    .unwrap_or(fallback);

    Ok(SweepResult { reports, extrapolated_limit, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn cutoff_plateau_transition_and_tail() {
        for cutoff in [
            CutoffSpec::SmoothBump { radius: 1.0 },
            CutoffSpec::PolySmoothstep { radius: 1.0, order: 2 },
        ] {
            assert_eq!(cutoff.jet(0.3).theta, 1.0);
            assert_eq!(cutoff.jet(1.0).theta, 1.0);
            assert_eq!(cutoff.jet(2.0).theta, 0.0);
            assert_eq!(cutoff.jet(5.0).theta, 0.0);
            for r in [1.1, 1.5, 1.9] {
                let jet = cutoff.jet(r);
                assert!(jet.theta > 0.0 && jet.theta < 1.0, "{cutoff:?} at {r}");
                assert!(jet.d1 < 0.0, "cutoff decreases through the transition");
            }
        }
    }

    #[test]
    fn cutoff_junction_derivatives_vanish() {
        let bump = CutoffSpec::SmoothBump { radius: 1.0 };
        for r in [1.0 + 1e-4, 2.0 - 1e-4] {
            let jet = bump.jet(r);
            assert!(jet.d1.abs() < 1e-3 && jet.d2.abs() < 1e-1, "smooth bump near junction {r}");
        }
        let quintic = CutoffSpec::PolySmoothstep { radius: 1.0, order: 2 };
        for r in [1.0, 2.0] {
            let jet = quintic.jet(r);
            assert_eq!((jet.d1, jet.d2), (0.0, 0.0));
        }
    }

    #[test]
    fn cutoff_jets_match_finite_differences() {
        let h = 1e-5;
        for cutoff in [
            CutoffSpec::SmoothBump { radius: 1.0 },
            CutoffSpec::PolySmoothstep { radius: 1.0, order: 2 },
            CutoffSpec::PolySmoothstep { radius: 1.0, order: 3 },
        ] {
            for r in [1.2, 1.5, 1.8] {
                let jet = cutoff.jet(r);
                let fd1 = (cutoff.jet(r + h).theta - cutoff.jet(r - h).theta) / (2.0 * h);
                let fd2 = (cutoff.jet(r + h).theta - 2.0 * jet.theta + cutoff.jet(r - h).theta)
                    / (h * h);
                assert!((jet.d1 - fd1).abs() <= 1e-6 * jet.d1.abs().max(1.0), "{cutoff:?} d1 at {r}");
                assert!((jet.d2 - fd2).abs() <= 1e-4 * jet.d2.abs().max(1.0), "{cutoff:?} d2 at {r}");
            }
        }
    }

    #[test]
    fn cutoff_rejects_bad_parameters() {
        assert!(CutoffSpec::SmoothBump { radius: 0.0 }.validate().is_err());
        assert!(CutoffSpec::PolySmoothstep { radius: 1.0, order: 0 }.validate().is_err());
        assert!(CutoffSpec::PolySmoothstep { radius: 1.0, order: 4 }.validate().is_err());
    }

    #[test]
    fn harmonic_normalization_is_unit() {
        for d in [3_u32, 4, 6] {
            let h = SphericalHarmonicDeg1::last_axis(dim(d));
            let norm_sq = h.normalization * h.normalization
                * angular_moment(dim(d), AngularMoment::LastCoordSquared);
            assert!((norm_sq - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn interior_quotient_sits_above_the_sharp_constant() {
        let report = quotient_hardy_interior(dim(3), 0.5, &CutoffSpec::default_bump()).unwrap();
        assert!(report.quotient > 0.25);
        assert!(report.denominator.value > 0.0);
    }

    #[test]
    fn interior_sweep_decreases() {
        let fam = MinimizingFamily::new(
            FamilyKind::HardyInterior,
            dim(3),
            CutoffSpec::default_bump(),
        )
        .unwrap();
        let result = sweep(&fam, &[0.2, 0.1, 0.05]).unwrap();
        assert!(result.monotone);
        assert!(result.reports.iter().all(|r| r.quotient > 0.25));
    }

    #[test]
    fn interior_quotient_is_scale_invariant() {
        // Replacing (ε, R) by (λε, λR) rescales the test function without
        // changing its quotient.
        let lambda = 2.0;
        let q1 = quotient_hardy_interior(dim(3), 0.1, &CutoffSpec::SmoothBump { radius: 1.0 })
            .unwrap()
            .quotient;
        let q2 = quotient_hardy_interior(
            dim(3),
            0.1 * lambda,
            &CutoffSpec::SmoothBump { radius: lambda },
        )
        .unwrap()
        .quotient;
        assert!((q1 - q2).abs() <= 1e-6 * q1);
    }

    #[test]
    fn halfspace_inner_numerator_is_half_ball_volume() {
        let (num, _) = halfspace_inner_parts(dim(3));
        let half_ball = 0.5 * 4.0 / 3.0 * std::f64::consts::PI;
        assert!((num - half_ball).abs() <= 1e-12);
    }

    #[test]
    fn halfspace_quotient_matches_the_affine_closed_form() {
        for d in [2_u32, 3, 5] {
            for eps in [0.5, 0.1, 0.01] {
                let report = quotient_halfspace(dim(d), eps).unwrap();
                let expected = f64::from(d) * f64::from(d) / 4.0 + f64::from(d) / 2.0 * eps;
                assert!(
                    (report.quotient - expected).abs() <= 1e-8 * expected,
                    "d={d} ε={eps}: {} vs {expected}",
                    report.quotient
                );
            }
        }
    }

    #[test]
    fn halfspace_close_to_limit_example() {
        let report = quotient_halfspace(dim(3), 0.01).unwrap();
        assert!((report.quotient - 2.25).abs() <= 0.1);
    }

    #[test]
    fn halfspace_rejects_divergent_tails() {
        assert!(matches!(quotient_halfspace(dim(3), 0.0), Err(Error::NonIntegrable(_))));
        assert!(matches!(quotient_halfspace(dim(3), -0.1), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn mixed_order_requires_harmonic_exactly_in_low_dimensions() {
        let cutoff = CutoffSpec::default_bump();
        let h3 = SphericalHarmonicDeg1::last_axis(dim(3));
        assert!(quotient_hardy_rellich(dim(3), 0.1, &cutoff, None).is_err());
        assert!(quotient_hardy_rellich(dim(3), 0.1, &cutoff, Some(&h3)).is_ok());
        let h5 = SphericalHarmonicDeg1::last_axis(dim(5));
        assert!(quotient_hardy_rellich(dim(5), 0.1, &cutoff, Some(&h5)).is_err());
        assert!(quotient_hardy_rellich(dim(5), 0.1, &cutoff, None).is_ok());
    }

    #[test]
    fn mixed_order_sweeps_decrease_toward_each_constant() {
        let cutoff = CutoffSpec::default_bump();
        let cases = [(3_u32, 25.0 / 36.0), (4, 3.0), (5, 6.25)];
        for (d, limit) in cases {
            let fam =
                MinimizingFamily::new(FamilyKind::HardyRellich, dim(d), cutoff.clone()).unwrap();
            let result = sweep(&fam, &[0.2, 0.1, 0.05, 0.02]).unwrap();
            assert!(result.monotone, "d={d}");
            for rep in &result.reports {
                assert!(rep.quotient > limit, "d={d}, ε={}: {}", rep.epsilon, rep.quotient);
            }
        }
    }

    #[test]
    fn mixed_order_rejects_nonpositive_eps() {
        let cutoff = CutoffSpec::default_bump();
        assert!(matches!(
            quotient_hardy_rellich(dim(5), 0.0, &cutoff, None),
            Err(Error::NonIntegrable(_))
        ));
    }

    #[test]
    fn sweep_input_validation() {
        let fam = MinimizingFamily::new(
            FamilyKind::HardyInterior,
            dim(3),
            CutoffSpec::default_bump(),
        )
        .unwrap();
        assert!(sweep(&fam, &[]).is_err());
        assert!(sweep(&fam, &[0.1, 0.2]).is_err());
        assert!(sweep(&fam, &[0.2, 0.1, -0.05]).is_err());
    }

    #[test]
    fn halfspace_extrapolation_recovers_the_constant_exactly() {
        let fam = MinimizingFamily {
            kind: FamilyKind::HalfSpace,
            d: dim(3),
            cutoff: CutoffSpec::default_bump(),
            harmonic: None,
        };
        let result = sweep(&fam, &[0.4, 0.2, 0.1, 0.05]).unwrap();
        // The quotient is exactly affine in ε, so the rational fit nails it.
        assert!((result.extrapolated_limit - 2.25).abs() <= 1e-7);
    }

    #[test]
    fn ball_minimizer_requires_three_poles_and_sphere_placement() {
        let center = Point::zeros(3);
        let two = PoleSet::new(vec![
            Point(vec![1.0, 0.0, 0.0]),
            Point(vec![-1.0, 0.0, 0.0]),
        ])
        .unwrap();
        assert!(matches!(
            quotient_multipolar_ball_minimizer(&center, 1.0, &two, &McPlan::default()),
            Err(Error::NonIntegrable(_))
        ));
        let off_sphere = PoleSet::new(vec![
            Point(vec![1.0, 0.0, 0.0]),
            Point(vec![-1.0, 0.0, 0.0]),
            Point(vec![0.0, 0.5, 0.0]),
        ])
        .unwrap();
        assert!(quotient_multipolar_ball_minimizer(&center, 1.0, &off_sphere, &McPlan::default())
            .is_err());
    }

    #[test]
    fn ball_minimizer_quotient_near_expected_value() {
        // Equatorial equilateral triangle on the unit sphere: expect d²/n² = 1.
        let center = Point::zeros(3);
        let poles = PoleSet::new(vec![
            Point(vec![1.0, 0.0, 0.0]),
            Point(vec![-0.5, 3.0_f64.sqrt() / 2.0, 0.0]),
            Point(vec![-0.5, -(3.0_f64.sqrt()) / 2.0, 0.0]),
        ])
        .unwrap();
        let plan = McPlan { samples: 1_000_000, seed: 42 };
        let report = quotient_multipolar_ball_minimizer(&center, 1.0, &poles, &plan).unwrap();
        assert!((report.quotient - 1.0).abs() <= 0.05, "quotient {}", report.quotient);
    }
}
