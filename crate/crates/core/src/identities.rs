//! Numerical verification of integral identities and inequalities on
//! randomized smooth compactly supported test functions.
//!
//! Test functions are polynomials times a high-order polynomial bump, so
//! value, gradient, Hessian, and Laplacian are all available in closed
//! form — the fourth-order checks would drown in noise with numerical
//! differentiation. Integrals run over the support ball with a tensor
//! Gauss rule (radial Gauss–Legendre × product spherical rule), which
//! converges spectrally for these analytic integrands and keeps every
//! check deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::constants;
use crate::error::{Error, Result};
use crate::geometry::{Dimension, Point, PoleSet};
use crate::quadrature::{gauss_legendre, random_unit_vector};
use crate::supersolution::{Prefactor, SupersolutionAnsatz};

/// Default annulus bounds for randomized supports that must avoid the
/// origin.
pub const DEFAULT_SUPPORT_INNER: f64 = 0.3;
pub const DEFAULT_SUPPORT_OUTER: f64 = 1.5;

/// Minimum gap kept between a support ball and any declared singular
/// point.
pub const DEFAULT_POLE_STANDOFF: f64 = 0.1;

/// Relative tolerance for identity gaps.
pub const IDENTITY_GAP_TOL: f64 = 1e-6;

/// Base relative tolerance for inequality margins.
pub const MARGIN_TOL: f64 = 1e-7;

/// Value and derivatives of a test function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct UJet {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `d × d` Hessian.
    pub hessian: Vec<f64>,
    pub laplacian: f64,
}

impl UJet {
    pub fn zeros(d: usize) -> Self {
        UJet { value: 0.0, grad: vec![0.0; d], hessian: vec![0.0; d * d], laplacian: 0.0 }
    }

    fn clear(&mut self) {
        self.value = 0.0;
        self.laplacian = 0.0;
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        self.hessian.iter_mut().for_each(|h| *h = 0.0);
    }
}

/// A smooth compactly supported test function
/// `u(x) = p(x − x₀) · (1 − |x − x₀|²/s²)⁶` on the ball `B(x₀, s)`,
/// with `p` a polynomial of degree ≤ 2. All derivatives through second
/// order are closed-form.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    constant: f64,
    linear: Vec<f64>,
    /// Row-major symmetric `d × d` quadratic coefficient matrix.
    quadratic: Vec<f64>,
    center: Point,
    scale: f64,
}

impl TestFunction {
    pub fn new(
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<f64>,
        center: Point,
        scale: f64,
    ) -> Result<Self> {
        let d = center.dim();
        if linear.len() != d || quadratic.len() != d * d {
            return Err(Error::InvalidInput(format!(
                "coefficient shapes ({}, {}) do not match dimension {d}",
                linear.len(),
                quadratic.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!("support radius must be positive, got {scale}")));
        }
        for i in 0..d {
            for j in 0..i {
                if (quadratic[i * d + j] - quadratic[j * d + i]).abs() > 1e-14 {
                    return Err(Error::InvalidInput(
                        "quadratic coefficient matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(TestFunction { constant, linear, quadratic, center, scale })
    }

    /// The identically zero function on a unit ball at the origin.
    pub fn zero(d: Dimension) -> Self {
        let n = d.as_usize();
        TestFunction {
            constant: 0.0,
            linear: vec![0.0; n],
            quadratic: vec![0.0; n * n],
            center: Point::zeros(n),
            scale: 1.0,
        }
    }

    /// A radial test function `(c₀ + c₂|x|²)(1 − |x|²/s²)⁶` supported in
    /// the origin-centered ball of radius `s`.
    pub fn radial_bump(d: Dimension, c0: f64, c2: f64, support_radius: f64) -> Result<Self> {
        let n = d.as_usize();
        let mut quadratic = vec![0.0; n * n];
        for i in 0..n {
            quadratic[i * n + i] = c2;
        }
        TestFunction::new(c0, vec![0.0; n], quadratic, Point::zeros(n), support_radius)
    }

    fn random_with_support(center: Point, scale: f64, rng: &mut impl Rng) -> Self {
        let d = center.dim();
        let constant = rng.gen_range(-1.0..1.0);
        let linear: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut quadratic = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let c = rng.gen_range(-1.0..1.0);
                quadratic[i * d + j] = c;
                quadratic[j * d + i] = c;
            }
        }
        TestFunction { constant, linear, quadratic, center, scale }
    }

    fn place_support(
        d: Dimension,
        inner: f64,
        outer: f64,
        rng: &mut impl Rng,
        accept: impl Fn(&[f64], f64) -> bool,
    ) -> Result<(Point, f64)> {
        for _ in 0..1000 {
            let scale = rng.gen_range(0.15..0.3);
            let lo = inner + scale + 0.05;
            let hi = outer - scale - 0.05;
            if !(hi > lo) {
                continue;
            }
            let rho = rng.gen_range(lo..hi);
            let dir = random_unit_vector(rng, d.as_usize());
            let center: Vec<f64> = dir.iter().map(|c| c * rho).collect();
            if accept(&center, scale) {
                return Ok((Point(center), scale));
            }
        }
        Err(Error::InvalidInput(
            "could not place a support ball satisfying the constraints".into(),
        ))
    }

    /// Random function supported in a ball inside the annulus
    /// `inner < |x| < outer` (so the origin is avoided by a margin).
    pub fn random_in_annulus(
        d: Dimension,
        inner: f64,
        outer: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let (center, scale) = Self::place_support(d, inner, outer, rng, |_, _| true)?;
        Ok(Self::random_with_support(center, scale, rng))
    }

    /// Random function whose support also stays strictly inside the upper
    /// half-space `x_d > 0`.
    pub fn random_in_upper_annulus(
        d: Dimension,
        inner: f64,
        outer: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let (center, scale) = Self::place_support(d, inner, outer, rng, |c, s| {
            c[c.len() - 1] > s + 0.05
        })?;
        Ok(Self::random_with_support(center, scale, rng))
    }

    /// Random function whose support keeps the given standoff from every
    /// pole (and avoids the origin via the annulus bounds).
    pub fn random_avoiding(
        d: Dimension,
        inner: f64,
        outer: f64,
        poles: &PoleSet,
        standoff: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let pole_coords: Vec<Vec<f64>> =
            poles.poles().iter().map(|p| p.coords().to_vec()).collect();
        let (center, scale) = Self::place_support(d, inner, outer, rng, |c, s| {
            pole_coords.iter().all(|a| {
                let dist2: f64 = c.iter().zip(a).map(|(ci, ai)| (ci - ai) * (ci - ai)).sum();
                dist2.sqrt() > s + standoff
            })
        })?;
        Ok(Self::random_with_support(center, scale, rng))
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn support_center(&self) -> &Point {
        &self.center
    }

    pub fn support_radius(&self) -> f64 {
        self.scale
    }

    /// The function `λ·u`, for homogeneity checks.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.constant *= lambda;
        out.linear.iter_mut().for_each(|c| *c *= lambda);
        out.quadratic.iter_mut().for_each(|c| *c *= lambda);
        out
    }

    /// Distance from the support ball to the origin (negative if the
    /// closed support contains the origin).
    pub fn origin_clearance(&self) -> f64 {
        self.center.norm() - self.scale
    }

    /// Closed-form value and derivatives at `x`, written into `jet`.
    pub fn jet_into(&self, x: &[f64], jet: &mut UJet) {
        let d = self.dim();
        debug_assert_eq!(x.len(), d);
        let s2 = self.scale * self.scale;
        let mut q = 0.0;
        for (xi, ci) in x.iter().zip(self.center.coords()) {
            q += (xi - ci) * (xi - ci);
        }
        q /= s2;
        if q >= 1.0 {
            jet.clear();
            return;
        }
        let om = 1.0 - q;
        let om2 = om * om;
        let b4 = om2 * om2;
        let b5 = b4 * om;
        let b6 = b5 * om;

        // Polynomial part in y = x − x₀: p = c₀ + l·y + yᵀQy.
        let mut p = self.constant;
        let mut trace_q = 0.0;
        for i in 0..d {
            let yi = x[i] - self.center.coords()[i];
            p += self.linear[i] * yi;
            trace_q += self.quadratic[i * d + i];
            let mut qy = 0.0;
            for j in 0..d {
                qy += self.quadratic[i * d + j] * (x[j] - self.center.coords()[j]);
            }
            p += yi * qy;
            jet.grad[i] = self.linear[i] + 2.0 * qy; // ∂ᵢp for now
        }

        // Bump part: B = (1−q)⁶ with q = |y|²/s².
        let dq_scale = 2.0 / s2;
        jet.value = p * b6;
        let mut grad_p = vec![0.0; d];
        grad_p.copy_from_slice(&jet.grad);
        let mut grad_dot = 0.0;
        let mut y_norm2 = 0.0;
        for i in 0..d {
            let yi = x[i] - self.center.coords()[i];
            let db_i = -6.0 * b5 * dq_scale * yi;
            jet.grad[i] = grad_p[i] * b6 + p * db_i;
            grad_dot += grad_p[i] * yi;
            y_norm2 += yi * yi;
        }
        let lap_b = 30.0 * b4 * dq_scale * dq_scale * y_norm2 - 6.0 * b5 * dq_scale * d as f64;
        jet.laplacian = 2.0 * trace_q * b6 - 12.0 * b5 * dq_scale * grad_dot + p * lap_b;
        for i in 0..d {
            let yi = x[i] - self.center.coords()[i];
            let db_i = -6.0 * b5 * dq_scale * yi;
            for j in 0..d {
                let yj = x[j] - self.center.coords()[j];
                let db_j = -6.0 * b5 * dq_scale * yj;
                let d2b = 30.0 * b4 * dq_scale * dq_scale * yi * yj
                    - if i == j { 6.0 * b5 * dq_scale } else { 0.0 };
                jet.hessian[i * d + j] = 2.0 * self.quadratic[i * d + j] * b6
                    + grad_p[i] * db_j
                    + grad_p[j] * db_i
                    + p * d2b;
            }
        }
    }
}

/// A quadrature rule over the unit ball: radial Gauss–Legendre times a
/// product spherical rule, stored in unit coordinates and mapped affinely
/// to any support ball at evaluation time.
#[derive(Debug, Clone)]
pub struct BallRule {
    dim: usize,
    /// Flat `node_count × dim` unit-ball coordinates.
    unit_coords: Vec<f64>,
    /// Combined weights including the `r^{d−1}` radial factor; scale by
    /// `radius^d` for a ball of that radius.
    unit_weights: Vec<f64>,
}

/// Product quadrature on the unit sphere `S^{d−1}`. `sizes` holds the
/// azimuthal count first, then one polar count per additional dimension.
/// Exact for spherical polynomials up to the rule degrees; the polar
/// weight `(1−t²)^{(d−3)/2}` is handled by Gauss–Legendre nodes with the
/// polynomial part folded in (odd d) or by the closed-form second-kind
/// Chebyshev rule (even d).
fn sphere_rule(d: usize, sizes: &[usize]) -> (Vec<f64>, Vec<f64>) {
    assert!(d >= 2 && sizes.len() == d - 1, "need one size per angular level");
    if d == 2 {
        let m = sizes[0];
        let mut dirs = Vec::with_capacity(2 * m);
        let weights = vec![2.0 * PI / m as f64; m];
        for j in 0..m {
            let angle = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            dirs.push(angle.cos());
            dirs.push(angle.sin());
        }
        return (dirs, weights);
    }
    let (sub_dirs, sub_weights) = sphere_rule(d - 1, &sizes[..d - 2]);
    let m = sizes[d - 2];
    let (polar_nodes, polar_weights): (Vec<f64>, Vec<f64>) = if (d - 3) % 2 == 0 {
        let (nodes, weights) = gauss_legendre(m);
        let fold = (d - 3) / 2;
        let weights = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * (1.0 - t * t).powi(fold as i32))
            .collect();
        (nodes, weights)
    } else {
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        let fold = (d - 4) / 2;
        for k in 1..=m {
            let angle = k as f64 * PI / (m as f64 + 1.0);
            let t = angle.cos();
            let base = PI / (m as f64 + 1.0) * angle.sin() * angle.sin();
            nodes.push(t);
            weights.push(base * (1.0 - t * t).powi(fold as i32));
        }
        (nodes, weights)
    };
    let sub_count = sub_weights.len();
    let mut dirs = Vec::with_capacity(d * sub_count * m);
    let mut weights = Vec::with_capacity(sub_count * m);
    for (t, wt) in polar_nodes.iter().zip(&polar_weights) {
        let sine = (1.0 - t * t).sqrt();
        for (k, ws) in sub_weights.iter().enumerate() {
            for c in &sub_dirs[k * (d - 1)..(k + 1) * (d - 1)] {
                dirs.push(c * sine);
            }
            dirs.push(*t);
            weights.push(wt * ws);
        }
    }
    (dirs, weights)
}

impl BallRule {
    pub fn new(d: Dimension, radial: usize, angular_sizes: &[usize]) -> Self {
        let n = d.as_usize();
        let (dirs, ang_weights) = sphere_rule(n, angular_sizes);
        let (gl_nodes, gl_weights) = gauss_legendre(radial);
        let node_count = ang_weights.len() * radial;
        let mut unit_coords = Vec::with_capacity(node_count * n);
        let mut unit_weights = Vec::with_capacity(node_count);
        for (t, wr) in gl_nodes.iter().zip(&gl_weights) {
            let r = 0.5 * (t + 1.0);
            let w_radial = 0.5 * wr * r.powi(n as i32 - 1);
            for (k, wa) in ang_weights.iter().enumerate() {
                for c in &dirs[k * n..(k + 1) * n] {
                    unit_coords.push(c * r);
                }
                unit_weights.push(w_radial * wa);
            }
        }
        BallRule { dim: n, unit_coords, unit_weights }
    }

    /// The default rule for each dimension: node counts chosen so the
    /// analytic integrands in scope come out well below the 1e−6 gap
    /// tolerances.
    pub fn standard(d: Dimension) -> Self {
        let n = d.as_usize();
        match n {
            2 => Self::new(d, 32, &[64]),
            3 => Self::new(d, 48, &[32, 32]),
            4 => Self::new(d, 36, &[20, 20, 20]),
            5 => Self::new(d, 24, &[12, 12, 12, 12]),
            _ => Self::new(d, 16, &vec![10; n - 1]),
        }
    }

    pub fn node_count(&self) -> usize {
        self.unit_weights.len()
    }

    /// Integrate `K` functionals of the jet of `u` over the ball
    /// `B(center, radius)` in one pass. Deterministic: chunk sums are
    /// reduced in index order regardless of thread scheduling.
    pub fn integrate_jets<const K: usize, F>(
        &self,
        u: &TestFunction,
        center: &[f64],
        radius: f64,
        f: F,
    ) -> [f64; K]
    where
        F: Fn(&[f64], &UJet) -> [f64; K] + Sync,
    {
        let d = self.dim;
        debug_assert_eq!(center.len(), d);
        let total = self.node_count();
        let chunk = 4096;
        let chunks = total.div_ceil(chunk);
        let scale = radius.powi(d as i32);
        let partials: Vec<[f64; K]> = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let start = ci * chunk;
                let end = (start + chunk).min(total);
                let mut jet = UJet::zeros(d);
                let mut x = vec![0.0; d];
                let mut acc = [0.0_f64; K];
                for i in start..end {
                    for k in 0..d {
                        x[k] = center[k] + radius * self.unit_coords[i * d + k];
                    }
                    u.jet_into(&x, &mut jet);
                    let vals = f(&x, &jet);
                    let w = scale * self.unit_weights[i];
                    for k in 0..K {
                        acc[k] += w * vals[k];
                    }
                }
                acc
            })
            .collect();
        let mut out = [0.0_f64; K];
        for part in partials {
            for k in 0..K {
                out[k] += part[k];
            }
        }
        out
    }
}

/// Outcome of one identity or inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Identity checks: `|lhs − rhs|`. Inequality checks: `lhs − rhs`.
    pub gap_or_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckReport {
    fn identity(lhs: f64, rhs: f64) -> Self {
        let gap = (lhs - rhs).abs();
        let tolerance = IDENTITY_GAP_TOL * lhs.abs().max(1.0);
        CheckReport { lhs, rhs, gap_or_margin: gap, tolerance, pass: gap <= tolerance }
    }

    fn inequality(lhs: f64, rhs: f64, base_tol: f64) -> Self {
        let margin = lhs - rhs;
        let tolerance = base_tol * lhs.abs().max(rhs.abs()).max(1.0);
        CheckReport { lhs, rhs, gap_or_margin: margin, tolerance, pass: margin >= -tolerance }
    }
}

fn require_origin_clearance(u: &TestFunction) -> Result<()> {
    if u.origin_clearance() <= 0.01 * u.support_radius() {
        return Err(Error::InvalidInput(
            "support must keep a positive distance from the origin for singular weights".into(),
        ));
    }
    Ok(())
}

fn check_dims(u: &TestFunction, d: Dimension, min: u32, context: &'static str) -> Result<()> {
    d.require_at_least(min, context)?;
    if u.dim() != d.as_usize() {
        return Err(Error::DimensionMismatch { point_dim: u.dim(), ambient: d.as_usize() });
    }
    Ok(())
}

/// Verify that expanding `∫|∇u + ((d−2)/2)(x/|x|²)u|²` reproduces the
/// Dirichlet energy minus the sharp singular term:
/// `∫|∇u|² − ((d−2)²/4)∫u²/|x|²` equals the manifestly nonnegative
/// square, which is the one-line proof of the interior inequality.
pub fn check_hardy_remainder(u: &TestFunction, d: Dimension) -> Result<CheckReport> {
    check_dims(u, d, 3, "the square-remainder identity")?;
    require_origin_clearance(u)?;
    let rule = BallRule::standard(d);
    let half = (d.as_f64() - 2.0) / 2.0;
    let [dirichlet, singular, square] = rule.integrate_jets(
        u,
        u.support_center().coords(),
        u.support_radius(),
        |x, jet| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let grad2: f64 = jet.grad.iter().map(|g| g * g).sum();
            let mut shifted = 0.0;
            for (gi, xi) in jet.grad.iter().zip(x) {
                let v = gi + half * xi / r2 * jet.value;
                shifted += v * v;
            }
            [grad2, jet.value * jet.value / r2, shifted]
        },
    );
    Ok(CheckReport::identity(dirichlet - half * half * singular, square))
}

/// Closed-form jets of the supported certificate ansatz shapes: value,
/// gradient, and Laplacian of `|x|^α` or `x_d|x|^α`.
fn ansatz_jet(ansatz: &SupersolutionAnsatz, d: Dimension, x: &[f64]) -> (f64, Vec<f64>, f64) {
    let alpha = ansatz.power;
    let df = d.as_f64();
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let ra = r2.powf(alpha / 2.0);
    let ram2 = r2.powf(alpha / 2.0 - 1.0);
    match ansatz.prefactor {
        Prefactor::One => {
            let grad: Vec<f64> = x.iter().map(|xi| alpha * ram2 * xi).collect();
            (ra, grad, alpha * (alpha + df - 2.0) * ram2)
        }
        Prefactor::LastCoord => {
            let xd = x[x.len() - 1];
            let mut grad: Vec<f64> = x.iter().map(|xi| alpha * xd * ram2 * xi).collect();
            let last = grad.len() - 1;
            grad[last] += ra;
            (xd * ra, grad, alpha * (alpha + df) * xd * ram2)
        }
        _ => unreachable!("caller restricts to closed-form prefactors"),
    }
}

/// Verify the ground-state substitution identity
/// `∫(|∇u|² + (Δφ/φ)u²) = ∫|∇u − (∇φ/φ)u|²` for a positive closed-form
/// ansatz φ — the mechanism that turns any positive supersolution into a
/// lower bound for the quadratic form.
pub fn check_ground_state_representation(
    u: &TestFunction,
    ansatz: &SupersolutionAnsatz,
    d: Dimension,
) -> Result<CheckReport> {
    check_dims(u, d, 2, "the ground-state identity")?;
    ansatz.validate(d)?;
    if !ansatz.closed_form() {
        return Err(Error::InvalidInput(
            "the ground-state identity needs a closed-form ansatz (plain or boundary power)"
                .into(),
        ));
    }
    if ansatz.power != 0.0 {
        require_origin_clearance(u)?;
    }
    let rule = BallRule::standard(d);
    let [weighted, square, bad] = rule.integrate_jets(
        u,
        u.support_center().coords(),
        u.support_radius(),
        |x, jet| {
            let (phi, grad_phi, lap_phi) = ansatz_jet(ansatz, d, x);
            if !(phi > 0.0) {
                // Positive weight on this slot flags the violation.
                return [0.0, 0.0, 1.0];
            }
            let grad2: f64 = jet.grad.iter().map(|g| g * g).sum();
            let mut twisted = 0.0;
            for (gi, pi) in jet.grad.iter().zip(&grad_phi) {
                let v = gi - pi / phi * jet.value;
                twisted += v * v;
            }
            [grad2 + lap_phi / phi * jet.value * jet.value, twisted, 0.0]
        },
    );
    if bad > 0.0 {
        return Err(Error::PositivityViolation(
            "ansatz is nonpositive somewhere on the support".into(),
        ));
    }
    Ok(CheckReport::identity(weighted, square))
}

/// Verify that the squared Hessian integrates to the squared Laplacian:
/// `Σᵢⱼ ∫|∂²ᵢⱼu|² = ∫|Δu|²` for compactly supported u.
pub fn check_hessian_laplacian_sum(u: &TestFunction, d: Dimension) -> Result<CheckReport> {
    check_dims(u, d, 2, "the Hessian–Laplacian identity")?;
    let rule = BallRule::standard(d);
    let [hess, lap] = rule.integrate_jets(
        u,
        u.support_center().coords(),
        u.support_radius(),
        |_, jet| {
            let h2: f64 = jet.hessian.iter().map(|h| h * h).sum();
            [h2, jet.laplacian * jet.laplacian]
        },
    );
    Ok(CheckReport::identity(hess, lap))
}

/// Verify the integration-by-parts identity linking the weighted
/// Dirichlet energy to the radial derivative and the Laplacian:
/// `(d−4)∫|∇u|²/|x|² = −4∫(x·∇u)²/|x|⁴ + 2∫(x·∇u)Δu/|x|²`.
pub fn check_gradient_weight_identity(u: &TestFunction, d: Dimension) -> Result<CheckReport> {
    check_dims(u, d, 3, "the weighted-gradient identity")?;
    require_origin_clearance(u)?;
    let rule = BallRule::standard(d);
    let [weighted, radial_sq, mixed] = rule.integrate_jets(
        u,
        u.support_center().coords(),
        u.support_radius(),
        |x, jet| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            let grad2: f64 = jet.grad.iter().map(|g| g * g).sum();
            let radial: f64 = x.iter().zip(&jet.grad).map(|(xi, gi)| xi * gi).sum();
            [grad2 / r2, radial * radial / (r2 * r2), radial / r2 * jet.laplacian]
        },
    );
    Ok(CheckReport::identity(
        (d.as_f64() - 4.0) * weighted,
        -4.0 * radial_sq + 2.0 * mixed,
    ))
}

/// The inequalities the falsification harness samples.
#[derive(Debug, Clone, PartialEq)]
pub enum InequalityKind {
    /// `∫|∇u|² ≥ ((d−2)²/4) ∫u²/|x|²`, d ≥ 3.
    Hardy,
    /// `∫|Δu|² ≥ (d²(d−4)²/16) ∫u²/|x|⁴`, d ≥ 5.
    Rellich,
    /// `∫|Δu|² ≥ C ∫|∇u|²/|x|²` with the sharp piecewise constant by
    /// default; an explicit constant supports sharpness probes.
    HardyRellich { constant: Option<f64> },
    /// `∫|Δu|² ≥ (d²/4) ∫(x·∇u)²/|x|⁴`, d ≥ 4.
    RadialRellich,
    /// The multipolar bound with product and single-pole terms:
    /// `∫|∇u|² ≥ ((d−2)²/(4n²))∫Vu² + ((d−2)²/(4n))Σᵢ∫u²/|x−aᵢ|²`.
    MultipolarHardy { poles: PoleSet },
    /// The componentwise consequence of the interior inequality applied to
    /// each gradient component: `∫|Δu|² ≥ ((d−2)²/4)∫|∇u|²/|x|²`.
    ComponentwiseHardyRellich,
}

/// Evaluate both sides of an inequality on one test function and report
/// the margin `lhs − rhs`. A margin below `−tolerance` is a genuine
/// counterexample to the inequality — a build-breaking event.
pub fn check_inequality(
    u: &TestFunction,
    kind: &InequalityKind,
    d: Dimension,
) -> Result<CheckReport> {
    let rule = BallRule::standard(d);
    let center = u.support_center().coords().to_vec();
    let radius = u.support_radius();
    match kind {
        InequalityKind::Hardy => {
            check_dims(u, d, 3, "the interior inequality")?;
            require_origin_clearance(u)?;
            let c = constants::hardy_interior_constant(d)?.value;
            let [grad2, singular] = rule.integrate_jets(u, &center, radius, |x, jet| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
                [g2, jet.value * jet.value / r2]
            });
            Ok(CheckReport::inequality(grad2, c * singular, MARGIN_TOL))
        }
        InequalityKind::Rellich => {
            check_dims(u, d, 5, "the fourth-order inequality")?;
            require_origin_clearance(u)?;
            let c = constants::rellich_constant(d)?.value;
            let [lap2, singular] = rule.integrate_jets(u, &center, radius, |x, jet| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                [jet.laplacian * jet.laplacian, jet.value * jet.value / (r2 * r2)]
            });
            Ok(CheckReport::inequality(lap2, c * singular, MARGIN_TOL))
        }
        InequalityKind::HardyRellich { constant } => {
            check_dims(u, d, 3, "the mixed-order inequality")?;
            require_origin_clearance(u)?;
            let c = match constant {
                Some(c) => *c,
                None => constants::hardy_rellich_constant(d)?.value,
            };
            let [lap2, weighted] = rule.integrate_jets(u, &center, radius, |x, jet| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
                [jet.laplacian * jet.laplacian, g2 / r2]
            });
            Ok(CheckReport::inequality(lap2, c * weighted, MARGIN_TOL))
        }
        InequalityKind::RadialRellich => {
            check_dims(u, d, 4, "the radial-derivative inequality")?;
            require_origin_clearance(u)?;
            let c = d.as_f64() * d.as_f64() / 4.0;
            let [lap2, radial_sq] = rule.integrate_jets(u, &center, radius, |x, jet| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let radial: f64 = x.iter().zip(&jet.grad).map(|(xi, gi)| xi * gi).sum();
                [jet.laplacian * jet.laplacian, radial * radial / (r2 * r2)]
            });
            Ok(CheckReport::inequality(lap2, c * radial_sq, MARGIN_TOL))
        }
        InequalityKind::MultipolarHardy { poles } => {
            check_dims(u, d, 3, "the multipolar inequality")?;
            if poles.dim() != d.as_usize() {
                return Err(Error::DimensionMismatch {
                    point_dim: poles.dim(),
                    ambient: d.as_usize(),
                });
            }
            let n = poles.n();
            if n < 2 {
                return Err(Error::TooFewPoles { got: n, min: 2 });
            }
            for pole in poles.poles() {
                if pole.dist(u.support_center()) <= radius + 0.5 * DEFAULT_POLE_STANDOFF {
                    return Err(Error::InvalidInput(
                        "support must keep a positive distance from every pole".into(),
                    ));
                }
            }
            let pole_coords: Vec<Vec<f64>> =
                poles.poles().iter().map(|p| p.coords().to_vec()).collect();
            let dm2 = d.as_f64() - 2.0;
            let c_product = dm2 * dm2 / (4.0 * (n * n) as f64);
            let c_single = dm2 * dm2 / (4.0 * n as f64);
            let [grad2, product_term, single_term] =
                rule.integrate_jets(u, &center, radius, |x, jet| {
                    let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
                    let mut inv_dist2 = vec![0.0; pole_coords.len()];
                    for (slot, a) in inv_dist2.iter_mut().zip(&pole_coords) {
                        let dist2: f64 =
                            x.iter().zip(a).map(|(xi, ai)| (xi - ai) * (xi - ai)).sum();
                        *slot = 1.0 / dist2;
                    }
                    let mut v = 0.0;
                    for i in 0..pole_coords.len() {
                        for j in (i + 1)..pole_coords.len() {
                            let sep2: f64 = pole_coords[i]
                                .iter()
                                .zip(&pole_coords[j])
                                .map(|(ai, aj)| (ai - aj) * (ai - aj))
                                .sum();
                            v += sep2 * inv_dist2[i] * inv_dist2[j];
                        }
                    }
                    let u2 = jet.value * jet.value;
                    let singles: f64 = inv_dist2.iter().sum();
                    [g2, v * u2, singles * u2]
                });
            Ok(CheckReport::inequality(
                grad2,
                c_product * product_term + c_single * single_term,
                10.0 * MARGIN_TOL,
            ))
        }
        InequalityKind::ComponentwiseHardyRellich => {
            check_dims(u, d, 3, "the componentwise mixed-order inequality")?;
            require_origin_clearance(u)?;
            let dm2 = d.as_f64() - 2.0;
            let c = dm2 * dm2 / 4.0;
            let [lap2, weighted] = rule.integrate_jets(u, &center, radius, |x, jet| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let g2: f64 = jet.grad.iter().map(|g| g * g).sum();
                [jet.laplacian * jet.laplacian, g2 / r2]
            });
            Ok(CheckReport::inequality(lap2, c * weighted, MARGIN_TOL))
        }
    }
}

/// Everything the batch runner can exercise, in CLI-addressable form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckTarget {
    HardyRemainder,
    GroundStatePower,
    GroundStateBoundary,
    HessianSum,
    GradientWeight,
    Hardy,
    Rellich,
    HardyRellich,
    RadialRellich,
    MultipolarHardy,
    ComponentwiseHardyRellich,
}

impl CheckTarget {
    pub const ALL: [CheckTarget; 11] = [
        CheckTarget::HardyRemainder,
        CheckTarget::GroundStatePower,
        CheckTarget::GroundStateBoundary,
        CheckTarget::HessianSum,
        CheckTarget::GradientWeight,
        CheckTarget::Hardy,
        CheckTarget::Rellich,
        CheckTarget::HardyRellich,
        CheckTarget::RadialRellich,
        CheckTarget::MultipolarHardy,
        CheckTarget::ComponentwiseHardyRellich,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckTarget::HardyRemainder => "hardy-remainder",
            CheckTarget::GroundStatePower => "ground-state-power",
            CheckTarget::GroundStateBoundary => "ground-state-boundary",
            CheckTarget::HessianSum => "hessian-sum",
            CheckTarget::GradientWeight => "gradient-weight",
            CheckTarget::Hardy => "hardy",
            CheckTarget::Rellich => "rellich",
            CheckTarget::HardyRellich => "hardy-rellich",
            CheckTarget::RadialRellich => "radial-rellich",
            CheckTarget::MultipolarHardy => "multipolar-hardy",
            CheckTarget::ComponentwiseHardyRellich => "componentwise-hardy-rellich",
        }
    }

    pub fn from_name(name: &str) -> Option<CheckTarget> {
        CheckTarget::ALL.iter().copied().find(|t| t.name() == name)
    }

    /// Smallest ambient dimension the check is defined in, so callers can
    /// reject a request before any quadrature runs.
    pub fn min_dimension(&self) -> u32 {
        match self {
            CheckTarget::GroundStatePower
            | CheckTarget::GroundStateBoundary
            | CheckTarget::HessianSum => 2,
            CheckTarget::HardyRemainder
            | CheckTarget::GradientWeight
            | CheckTarget::Hardy
            | CheckTarget::HardyRellich
            | CheckTarget::MultipolarHardy
            | CheckTarget::ComponentwiseHardyRellich => 3,
            CheckTarget::RadialRellich => 4,
            CheckTarget::Rellich => 5,
        }
    }

    /// Default poles for the multipolar target: `±e₁`.
    fn default_poles(d: Dimension) -> PoleSet {
        let n = d.as_usize();
        let mut plus = vec![0.0; n];
        plus[0] = 1.0;
        let mut minus = vec![0.0; n];
        minus[0] = -1.0;
        PoleSet::new(vec![Point(plus), Point(minus)]).expect("two distinct poles")
    }
}

/// One row of a batch run.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome {
    pub index: u32,
    pub report: CheckReport,
}

fn batch_stream(seed: u64, index: u32) -> u64 {
    // SplitMix-style mixing keeps per-index generators decorrelated.
    let mut z = seed ^ (u64::from(index).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Run `count` independent seeded trials of one check.
pub fn run_check_batch(
    target: CheckTarget,
    d: Dimension,
    count: u32,
    seed: u64,
) -> Result<Vec<BatchOutcome>> {
    let mut outcomes = Vec::with_capacity(count as usize);
    for index in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(batch_stream(seed, index));
        let report = match target {
            CheckTarget::HardyRemainder => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_hardy_remainder(&u, d)?
            }
            CheckTarget::GroundStatePower => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                let ansatz =
                    SupersolutionAnsatz::power_law(-(d.as_f64() - 2.0) / 2.0);
                check_ground_state_representation(&u, &ansatz, d)?
            }
            CheckTarget::GroundStateBoundary => {
                let u = TestFunction::random_in_upper_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                let ansatz = SupersolutionAnsatz::boundary_power_law(-d.as_f64() / 2.0);
                check_ground_state_representation(&u, &ansatz, d)?
            }
            CheckTarget::HessianSum => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_hessian_laplacian_sum(&u, d)?
            }
            CheckTarget::GradientWeight => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_gradient_weight_identity(&u, d)?
            }
            CheckTarget::Hardy => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::Hardy, d)?
            }
            CheckTarget::Rellich => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::Rellich, d)?
            }
            CheckTarget::HardyRellich => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::HardyRellich { constant: None }, d)?
            }
            CheckTarget::RadialRellich => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::RadialRellich, d)?
            }
            CheckTarget::MultipolarHardy => {
                let poles = CheckTarget::default_poles(d);
                let u = TestFunction::random_avoiding(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &poles,
                    DEFAULT_POLE_STANDOFF,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::MultipolarHardy { poles }, d)?
            }
            CheckTarget::ComponentwiseHardyRellich => {
                let u = TestFunction::random_in_annulus(
                    d,
                    DEFAULT_SUPPORT_INNER,
                    DEFAULT_SUPPORT_OUTER,
                    &mut rng,
                )?;
                check_inequality(&u, &InequalityKind::ComponentwiseHardyRellich, d)?
            }
        };
        outcomes.push(BatchOutcome { index, report });
    }
    Ok(outcomes)
}
