//! Singularity-aware numerical integration.
//!
//! Three layers: adaptive one-dimensional quadrature with an embedded
//! error estimate ([`integrate_1d`]), radial reduction of spherically
//! structured integrals with exact angular factors ([`radial_integral`],
//! [`sphere_area`], [`angular_moment`]), and seeded Monte Carlo over
//! axis-aligned boxes with analytic treatment of excluded singular balls
//! ([`integrate_nd`]). Also home to the deterministic sampling grids used
//! by the certificate checker ([`GridSpec`]).

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Dimension, Point};

/// Default tolerance for one-dimensional integrals; tight enough that 1-D
/// paths feed three-digit convergence claims without dominating their error.
pub const DEFAULT_TOL_1D: f64 = 1e-9;

/// Default exclusion-ball radius as a fraction of the domain scale.
pub const DEFAULT_EXCLUSION_FRACTION: f64 = 1e-4;

/// Hard cap on adaptive bisections before giving up on a tolerance.
pub const MAX_SUBDIVISIONS: usize = 2000;

/// Value, error estimate, and work counter for one integral.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    /// Nonnegative estimate of the absolute error.
    pub error_estimate: f64,
    /// Number of integrand evaluations consumed.
    pub evaluations: u64,
}

impl IntegralResult {
    /// Sum of two results: values add, error estimates and work add.
    pub fn combined_with(&self, other: &IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    /// Scale the value (and therefore the error estimate) by a constant.
    pub fn scaled_by(&self, factor: f64) -> IntegralResult {
        IntegralResult {
            value: self.value * factor,
            error_estimate: self.error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule: abscissae (positive
// half), Kronrod weights, and the embedded Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_6,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    value: f64,
    err: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a && self.b == other.b
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap on the error estimate; deterministic tie-breaks.
        self.err
            .total_cmp(&other.err)
            .then(self.a.total_cmp(&other.a))
            .then(self.b.total_cmp(&other.b))
    }
}

fn finite_or_err(y: f64, x: f64) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::InvalidInput(format!("integrand returned non-finite value {y} at {x}")))
    }
}

/// One Gauss–Kronrod pass over `[a, b]`: 15-point value, embedded 7-point
/// comparison, and the scaled error estimate.
fn gk15_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = finite_or_err(f(c), c)?;
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        fv1[j] = finite_or_err(f(c - dx), c - dx)?;
        fv2[j] = finite_or_err(f(c + dx), c + dx)?;
    }

    let mut resk = WGK[7] * fc;
    let mut resabs = WGK[7] * fc.abs();
    for j in 0..7 {
        resk += WGK[j] * (fv1[j] + fv2[j]);
        resabs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let mut resg = WG[3] * fc;
    for (i, &j) in [1_usize, 3, 5].iter().enumerate() {
        resg += WG[i] * (fv1[j] + fv2[j]);
    }

    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let eps = f64::EPSILON;
    if resabs > f64::MIN_POSITIVE / (50.0 * eps) {
        err = err.max(50.0 * eps * resabs);
    }
    Ok(Panel { value, err, a, b })
}

/// Adaptive quadrature of `f` over the finite interval `[a, b]`.
///
/// Bisects the interval with the worst error estimate until the summed
/// estimate drops below `tol · max(1, |value|)`. Endpoint singularities are
/// tolerated as long as they are integrable: no abscissa ever touches an
/// interval endpoint. Infinite ranges must be mapped to a finite interval
/// by the caller.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<IntegralResult> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integration bounds must be finite (got [{a}, {b}]); map infinite ranges first"
        )));
    }
    if !(a < b) {
        return Err(Error::InvalidInput(format!("need a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }

    let mut evaluations: u64 = 15;
    let first = gk15_panel(&f, a, b)?;
    let mut total_value = first.value;
    let mut total_err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    for _ in 0..MAX_SUBDIVISIONS {
        if total_err <= tol * total_value.abs().max(1.0) {
            return Ok(IntegralResult { value: total_value, error_estimate: total_err, evaluations });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // The interval is too narrow to bisect in floating point.
            return Err(Error::MaxSubdivisions { limit: MAX_SUBDIVISIONS, err: total_err });
        }
        let left = gk15_panel(&f, worst.a, mid)?;
        let right = gk15_panel(&f, mid, worst.b)?;
        evaluations += 30;
        total_value += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    if total_err <= tol * total_value.abs().max(1.0) {
        return Ok(IntegralResult { value: total_value, error_estimate: total_err, evaluations });
    }
    Err(Error::MaxSubdivisions { limit: MAX_SUBDIVISIONS, err: total_err })
}

/// Surface measure of the unit sphere in `d` dimensions: `2π^{d/2}/Γ(d/2)`,
/// computed by the two-step recursion to stay exact in simple cases.
pub fn sphere_area(d: Dimension) -> f64 {
    let mut areas = [0.0_f64; 2];
    areas[0] = 2.0 * PI; // d = 2
    areas[1] = 4.0 * PI; // d = 3
    let n = d.get();
    if n <= 3 {
        return areas[(n - 2) as usize];
    }
    let mut a_minus2 = 2.0 * PI;
    let mut a_minus1 = 4.0 * PI;
    for k in 4..=n {
        let next = 2.0 * PI * a_minus2 / (k as f64 - 2.0);
        a_minus2 = a_minus1;
        a_minus1 = next;
    }
    a_minus1
}

/// Exact angular factors used in radial reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularMoment {
    /// `∫_{S^{d−1}} 1`.
    One,
    /// `∫_{S^{d−1}} (x_d/|x|)²`.
    LastCoordSquared,
    /// Same integrals restricted to the upper half-sphere `x_d > 0`.
    HalfSphereOne,
    HalfSphereLastCoordSquared,
}

/// Closed-form spherical moments: the squared-coordinate moment is the full
/// measure split equally among the `d` coordinates.
pub fn angular_moment(d: Dimension, kind: AngularMoment) -> f64 {
    let area = sphere_area(d);
    match kind {
        AngularMoment::One => area,
        AngularMoment::LastCoordSquared => area / d.as_f64(),
        AngularMoment::HalfSphereOne => 0.5 * area,
        AngularMoment::HalfSphereLastCoordSquared => 0.5 * area / d.as_f64(),
    }
}

/// Integral of the radially symmetric function `g(|x|)` over the shell
/// `lo ≤ |x| ≤ hi` in `d` dimensions:
/// `sphere_area(d) · ∫ g(r) r^{d−1} dr`.
///
/// An infinite upper limit is accepted and handled by the substitution
/// `r = lo + t/(1−t)`; integrands in scope decay fast enough that the
/// mapped integrand stays tame.
pub fn radial_integral<F: Fn(f64) -> f64>(
    g: F,
    d: Dimension,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<IntegralResult> {
    if !(lo >= 0.0) || !lo.is_finite() {
        return Err(Error::InvalidInput(format!("radial lower limit must be finite and ≥ 0, got {lo}")));
    }
    let dm1 = d.as_f64() - 1.0;
    let inner = if hi.is_finite() {
        integrate_1d(|r| g(r) * r.powf(dm1), lo, hi, tol)?
    } else {
        integrate_1d(
            |t| {
                let om = 1.0 - t;
                let r = lo + t / om;
                g(r) * r.powf(dm1) / (om * om)
            },
            0.0,
            1.0,
            tol,
        )?
    };
    Ok(inner.scaled_by(sphere_area(d)))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`,
/// nodes ascending. Computed by Newton iteration on the three-term
/// recurrence; exact for polynomials of degree `2n−1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let mut p_prev = 1.0;
            let mut p = x;
            for j in 2..=n {
                let jf = j as f64;
                let next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
                p_prev = p;
                p = next;
            }
            let value = if n == 1 { x } else { p };
            let prev = if n == 1 { 1.0 } else { p_prev };
            deriv = n as f64 * (x * value - prev) / (x * x - 1.0);
            let step = value / deriv;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * deriv * deriv));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
    (
        order.iter().map(|&i| nodes[i]).collect(),
        order.iter().map(|&i| weights[i]).collect(),
    )
}

/// Axis-aligned box `[lo₁,hi₁]×…×[lo_d,hi_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("box corner dimensions disagree or are empty".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::InvalidInput(format!("box needs lo < hi per axis, got [{l}, {h}]")));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// Cube of half-width `half` centered at `center`.
    pub fn cube(center: &Point, half: f64) -> Result<Self> {
        let lo = center.coords().iter().map(|c| c - half).collect();
        let hi = center.coords().iter().map(|c| c + half).collect();
        BoxDomain::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Largest edge length; the reference scale for negligibility checks.
    pub fn scale(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }
}

/// A ball around a singular point that sampling must avoid. Its own mass is
/// reconstructed from the declared local power-law exponent: near the
/// center the integrand must behave like `C(θ) · dist^{exponent}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub center: Point,
    pub radius: f64,
    /// Local radial exponent of the integrand at this pole. May be omitted
    /// only when the radius is negligible relative to the domain scale.
    pub exponent: Option<f64>,
}

/// Sample budget and seed for a Monte Carlo integration.
#[derive(Debug, Clone, PartialEq)]
pub struct McPlan {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McPlan {
    fn default() -> Self {
        // Enough for ~1e−3 relative error on the smooth integrands in scope.
        McPlan { samples: 200_000, seed: 0 }
    }
}

const MC_BATCHES: u64 = 32;
const PROBE_GROUPS: usize = 8;
const PROBE_PER_GROUP: usize = 256;

fn splitmix(seed: u64, stream: u64) -> u64 {
    // One round of a splitmix-style mix keeps per-batch streams decorrelated.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn standard_gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller; u1 is kept away from zero so the log stays finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub(crate) fn random_unit_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_gaussian(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Estimate the mass of `f` inside one exclusion ball by probing the local
/// angular profile on a shell at 1.5× the exclusion radius and integrating
/// the declared power law analytically in the radial variable.
fn excluded_mass<F>(f: &F, exclusion: &Exclusion, d: usize, seed: u64) -> Result<(f64, f64, u64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let s = exclusion.exponent.expect("checked by caller");
    let rho = exclusion.radius;
    let probe_r = 1.5 * rho;
    let radial_factor = {
        let dim = Dimension::new(d as u32)?;
        sphere_area(dim) * rho.powf(d as f64 + s) / (d as f64 + s)
    };

    let mut group_means = [0.0_f64; PROBE_GROUPS];
    for (g, mean_slot) in group_means.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 1_000_003 + g as u64));
        let mut sum = 0.0;
        let mut x = vec![0.0_f64; d];
        for _ in 0..PROBE_PER_GROUP {
            let u = random_unit_vector(&mut rng, d);
            for k in 0..d {
                x[k] = exclusion.center.coords()[k] + probe_r * u[k];
            }
            let y = f(&x);
            if !y.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "integrand non-finite on probe shell of pole {:?}",
                    exclusion.center.coords()
                )));
            }
            sum += y * probe_r.powf(-s);
        }
        *mean_slot = sum / PROBE_PER_GROUP as f64;
    }

    let mean = group_means.iter().sum::<f64>() / PROBE_GROUPS as f64;
    let var = group_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
        / (PROBE_GROUPS as f64 - 1.0);
    let se = (var / PROBE_GROUPS as f64).sqrt();
    Ok((
        mean * radial_factor,
        se * radial_factor.abs(),
        (PROBE_GROUPS * PROBE_PER_GROUP) as u64,
    ))
}

/// Seeded Monte Carlo integration of `f` over a box, skipping declared
/// exclusion balls and adding their mass back analytically from the
/// declared local exponents.
///
/// Deterministic for a fixed plan regardless of thread count: every batch
/// derives its generator from the batch index, and batch results are
/// combined in index order. The error estimate is the batch-mean standard
/// error plus the probe-shell standard errors.
pub fn integrate_nd<F>(
    f: &F,
    domain: &BoxDomain,
    exclusions: &[Exclusion],
    plan: &McPlan,
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = domain.dim();
    let negligible = 1e-12 * domain.scale();
    for excl in exclusions {
        if excl.center.dim() != d {
            return Err(Error::DimensionMismatch { point_dim: excl.center.dim(), ambient: d });
        }
        if !(excl.radius >= 0.0) {
            return Err(Error::InvalidInput(format!("exclusion radius must be ≥ 0, got {}", excl.radius)));
        }
        if excl.radius > negligible {
            let Some(s) = excl.exponent else {
                return Err(Error::ExponentMissing { pole: excl.center.coords().to_vec() });
            };
            if d as f64 + s <= 0.0 {
                return Err(Error::NonIntegrable(format!(
                    "declared local exponent {s} is not integrable in dimension {d}"
                )));
            }
        }
    }
    if plan.samples == 0 {
        return Err(Error::InvalidInput("sample budget must be positive".into()));
    }

    let per_batch = plan.samples.div_ceil(MC_BATCHES);
    let volume = domain.volume();
    let lo = &domain.lo;
    let hi = &domain.hi;
    let active: Vec<&Exclusion> = exclusions.iter().filter(|e| e.radius > 0.0).collect();

    let batch_means: Vec<f64> = (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix(plan.seed, b));
            let mut x = vec![0.0_f64; d];
            let mut sum = 0.0;
            for _ in 0..per_batch {
                for k in 0..d {
                    x[k] = lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>();
                }
                let excluded = active.iter().any(|e| {
                    let mut dist2 = 0.0;
                    for (xk, ck) in x.iter().zip(e.center.coords()) {
                        dist2 += (xk - ck) * (xk - ck);
                    }
                    dist2 < e.radius * e.radius
                });
                if excluded {
                    continue;
                }
                let y = f(&x);
                if !y.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "integrand returned non-finite value at {x:?}"
                    )));
                }
                sum += y;
            }
            Ok(sum / per_batch as f64 * volume)
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = batch_means.len() as f64;
    let mean = batch_means.iter().sum::<f64>() / n;
    let var = batch_means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    let mut value = mean;
    let mut error = (var / n).sqrt();
    let mut evaluations = per_batch * MC_BATCHES;

    for (i, excl) in exclusions.iter().enumerate() {
        if excl.radius > negligible {
            let (mass, se, evals) = excluded_mass(f, excl, d, splitmix(plan.seed, 7_777 + i as u64))?;
            value += mass;
            error += se;
            evaluations += evals;
        }
    }

    Ok(IntegralResult { value, error_estimate: error, evaluations })
}

/// Radial shell spacing for sampling grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialSpacing {
    Log,
    Linear,
}

/// Radial part of a sampling grid: `shells` radii spanning `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub lo: f64,
    pub hi: f64,
    pub shells: u32,
    pub spacing: RadialSpacing,
}

/// Angular part of a sampling grid: a deterministic direction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    pub directions: u32,
    pub seed: u64,
}

/// Deterministic product grid (radii × directions) used for certificate
/// residual sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radial: RadialGrid,
    pub angular: AngularGrid,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, shells: u32, spacing: RadialSpacing, directions: u32, seed: u64) -> Result<Self> {
        let spec = GridSpec {
            radial: RadialGrid { lo, hi, shells, spacing },
            angular: AngularGrid { directions, seed },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radial.lo > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radial grid needs lo > 0, got {}",
                self.radial.lo
            )));
        }
        if !(self.radial.hi > self.radial.lo) || !self.radial.hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "radial grid needs finite hi > lo, got [{}, {}]",
                self.radial.lo, self.radial.hi
            )));
        }
        if self.radial.shells < 2 {
            return Err(Error::InvalidInput(format!(
                "radial grid needs at least 2 shells, got {}",
                self.radial.shells
            )));
        }
        if self.angular.directions == 0 {
            return Err(Error::InvalidInput("angular grid needs at least 1 direction".into()));
        }
        Ok(())
    }

    /// The shell radii, inclusive of both ends.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.radial.shells as usize;
        let (lo, hi) = (self.radial.lo, self.radial.hi);
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match self.radial.spacing {
                    RadialSpacing::Linear => lo + (hi - lo) * t,
                    RadialSpacing::Log => lo * (hi / lo).powf(t),
                }
            })
            .collect()
    }

    /// The unit direction set. In three dimensions a spherical Fibonacci
    /// lattice gives deterministic quasi-uniform coverage (the seed is
    /// ignored); in other dimensions the directions are seeded normalized
    /// Gaussians, deterministic for a fixed seed.
    pub fn directions(&self, d: Dimension) -> Vec<Point> {
        let n = self.angular.directions as usize;
        if d.get() == 3 {
            let golden_angle = PI * (3.0 - 5.0_f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden_angle * k as f64;
                    Point(vec![rho * phi.cos(), rho * phi.sin(), z])
                })
                .collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(self.angular.seed);
            (0..n).map(|_| Point(random_unit_vector(&mut rng, d.as_usize()))).collect()
        }
    }

    /// All grid points: every shell radius times every direction.
    pub fn points(&self, d: Dimension) -> Vec<Point> {
        let dirs = self.directions(d);
        let mut out = Vec::with_capacity(dirs.len() * self.radial.shells as usize);
        for r in self.radii() {
            for dir in &dirs {
                out.push(Point(dir.coords().iter().map(|c| c * r).collect()));
            }
        }
        out
    }

    /// Human-readable summary recorded in certificates.
    pub fn descriptor(&self) -> String {
        let spacing = match self.radial.spacing {
            RadialSpacing::Log => "log",
            RadialSpacing::Linear => "linear",
        };
        format!(
            "radial [{:.3e}, {:.3e}] × {} shells ({}), {} directions (seed {})",
            self.radial.lo, self.radial.hi, self.radial.shells, spacing, self.angular.directions, self.angular.seed
        )
    }
}
