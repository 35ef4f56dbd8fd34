//! Discrete eigenvalue estimates of best constants.
//!
//! The sharp constant of the interior inequality on a ball is the smallest
//! generalized eigenvalue of the pair (Dirichlet form, singular mass form)
//! over radial functions. This module discretizes both forms with linear
//! finite elements on a log-spaced radial mesh truncated away from the
//! singularity and solves the pencil by inverse power iteration. Because
//! every discrete candidate extends by zero to an admissible function of
//! the continuous problem, the estimate can only sit above the sharp
//! constant; it creeps down toward it as the truncation radius shrinks.

use crate::error::{Error, Result};
use crate::geometry::Dimension;
use crate::quadrature::gauss_legendre;

/// Fewest mesh nodes (endpoints included) the assembler accepts.
pub const MIN_MESH_NODES: usize = 8;

/// Iteration cap of the eigenvalue solver.
pub const MAX_EIG_ITERATIONS: usize = 1000;

/// Default relative backward-error tolerance of the eigenvalue solver.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// A strictly increasing radial mesh on `[δ, R]` with `δ > 0`.
///
/// Both endpoints carry Dirichlet conditions: vanishing at `R` matches
/// compact support in the ball, and vanishing at `δ` makes every discrete
/// candidate extend by zero to an admissible function on the whole ball —
/// the property that keeps the eigenvalue estimate an upper bound for the
/// sharp constant.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    nodes: Vec<f64>,
}

impl RadialMesh {
    /// Log-spaced mesh with `count` nodes from `δ` to `R` inclusive.
    /// Near-optimal profiles vary on logarithmic scales near the
    /// singularity, so geometric spacing is the only spacing offered.
    pub fn log(delta: f64, big_r: f64, count: usize) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "inner truncation must be positive and finite, got {delta}"
            )));
        }
        if !(big_r > delta && big_r.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "outer radius must exceed the truncation radius, got [{delta}, {big_r}]"
            )));
        }
        if count < MIN_MESH_NODES {
            return Err(Error::MeshTooCoarse { nodes: count, min: MIN_MESH_NODES });
        }
        let ratio = big_r / delta;
        let last = (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count)
            .map(|i| delta * ratio.powf(i as f64 / last))
            .collect();
        // Pin the endpoints exactly despite powf rounding.
        nodes[0] = delta;
        nodes[count - 1] = big_r;
        let mesh = RadialMesh { nodes };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() < MIN_MESH_NODES {
            return Err(Error::MeshTooCoarse { nodes: self.nodes.len(), min: MIN_MESH_NODES });
        }
        if !(self.nodes[0] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "first mesh node must be positive, got {}",
                self.nodes[0]
            )));
        }
        for pair in self.nodes.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidInput(format!(
                    "mesh nodes must increase strictly, got {} before {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn delta(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer_radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// The nested refinement: a midpoint (in log) inserted into every
    /// interval, keeping all original nodes.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for pair in self.nodes.windows(2) {
            nodes.push(pair[0]);
            nodes.push((pair[0] * pair[1]).sqrt());
        }
        nodes.push(self.outer_radius());
        RadialMesh { nodes }
    }

    pub fn descriptor(&self) -> String {
        format!(
            "log-radial[{:.3e}, {:.3e}] nodes={}",
            self.delta(),
            self.outer_radius(),
            self.nodes.len()
        )
    }
}

/// A symmetric tridiagonal matrix: `diag` of length n, `off` of length n−1.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl TriDiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64], out: &mut Vec<f64>) {
        let n = self.n();
        out.clear();
        out.resize(n, 0.0);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.diag[i] * x[i] * x[i];
            if i + 1 < n {
                acc += 2.0 * self.off[i] * x[i] * x[i + 1];
            }
        }
        acc
    }

    /// LDLᵀ factorization; fails on a non-positive pivot.
    pub fn ldlt(&self) -> Result<TriDiagLdlt> {
        let n = self.n();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = self.diag[0];
        for i in 0..n - 1 {
            if !(d[i] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "matrix is not positive definite (pivot {} at row {i})",
                    d[i]
                )));
            }
            l[i] = self.off[i] / d[i];
            d[i + 1] = self.diag[i + 1] - l[i] * l[i] * d[i];
        }
        if !(d[n - 1] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "matrix is not positive definite (pivot {} at row {})",
                d[n - 1],
                n - 1
            )));
        }
        Ok(TriDiagLdlt { d, l })
    }
}

/// The LDLᵀ factors of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TriDiagLdlt {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl TriDiagLdlt {
    pub fn solve(&self, b: &[f64], out: &mut Vec<f64>) {
        let n = self.d.len();
        out.clear();
        out.extend_from_slice(b);
        for i in 1..n {
            let prev = out[i - 1];
            out[i] -= self.l[i - 1] * prev;
        }
        for i in 0..n {
            out[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            let next = out[i + 1];
            out[i] -= self.l[i] * next;
        }
    }
}

/// Assemble the two quadratic forms
/// `∫ u′(r)² w_stiff(r) dr` and `∫ u(r)² w_mass(r) dr`
/// over piecewise-linear functions on the mesh vanishing at both ends.
/// Element integrals use a 6-point Gauss rule, exact for the polynomial
/// part and far below discretization error for the smooth weights.
pub fn assemble_forms<FS, FM>(
    mesh: &RadialMesh,
    stiffness_weight: FS,
    mass_weight: FM,
) -> Result<(TriDiag, TriDiag)>
where
    FS: Fn(f64) -> f64,
    FM: Fn(f64) -> f64,
{
    mesh.validate()?;
    let nodes = mesh.nodes();
    let unknowns = nodes.len() - 2;
    let (gl_nodes, gl_weights) = gauss_legendre(6);
    let mut a = TriDiag { diag: vec![0.0; unknowns], off: vec![0.0; unknowns.saturating_sub(1)] };
    let mut b = TriDiag { diag: vec![0.0; unknowns], off: vec![0.0; unknowns.saturating_sub(1)] };

    for e in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let h = x1 - x0;
        let mut a_ll = 0.0;
        let mut a_lr = 0.0;
        let mut a_rr = 0.0;
        let mut m_ll = 0.0;
        let mut m_lr = 0.0;
        let mut m_rr = 0.0;
        for (t, w) in gl_nodes.iter().zip(&gl_weights) {
            let r = 0.5 * (x0 + x1) + 0.5 * h * t;
            let scale = 0.5 * h * w;
            let ws = stiffness_weight(r);
            let wm = mass_weight(r);
            let phi_l = (x1 - r) / h;
            let phi_r = (r - x0) / h;
            a_ll += scale * ws / (h * h);
            a_lr -= scale * ws / (h * h);
            a_rr += scale * ws / (h * h);
            m_ll += scale * wm * phi_l * phi_l;
            m_lr += scale * wm * phi_l * phi_r;
            m_rr += scale * wm * phi_r * phi_r;
        }
        // Element nodes e, e+1 map to unknowns e−1, e (endpoints dropped).
        if e >= 1 {
            a.diag[e - 1] += a_ll;
            b.diag[e - 1] += m_ll;
        }
        if e <= unknowns {
            if e >= 1 && e < unknowns {
                a.off[e - 1] += a_lr;
                b.off[e - 1] += m_lr;
            }
            if e < unknowns {
                a.diag[e] += a_rr;
                b.diag[e] += m_rr;
            }
        }
    }
    Ok((a, b))
}

/// The two forms of the interior inequality on a truncated ball, over
/// radial functions: stiffness `∫ u′² r^{d−1} dr` against the singular
/// mass `∫ u² r^{d−3} dr`.
pub fn assemble_hardy_forms(d: Dimension, mesh: &RadialMesh) -> Result<(TriDiag, TriDiag)> {
    d.require_at_least(3, "the interior eigenvalue estimate")?;
    let df = d.as_f64();
    assemble_forms(mesh, |r| r.powf(df - 1.0), |r| r.powf(df - 3.0))
}

/// Outcome of an eigenvalue solve.
#[derive(Debug, Clone, PartialEq)]
pub struct EigEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Relative backward error `‖Au − μBu‖ / ‖Au‖` at return.
    pub residual_norm: f64,
    /// Human-readable description of the mesh or pencil solved.
    pub mesh: String,
}

/// Smallest eigenvalue of the pencil `A u = μ B u` for symmetric positive
/// definite tridiagonal `A`, `B`, by inverse power iteration on `A⁻¹B`
/// with `B`-normalization. Converges when the relative backward error
/// drops below `tol`.
pub fn smallest_generalized_eig(a: &TriDiag, b: &TriDiag, tol: f64) -> Result<EigEstimate> {
    let n = a.n();
    if n == 0 || b.n() != n {
        return Err(Error::InvalidInput(format!(
            "pencil shapes disagree or are empty: {} vs {}",
            n,
            b.n()
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be nonnegative, got {tol}")));
    }
    let factors = a.ldlt()?;
    let mut x = vec![1.0; n];
    let b_norm0 = b.quadratic_form(&x).sqrt();
    if !(b_norm0 > 0.0) {
        return Err(Error::InvalidInput("mass form is not positive definite".into()));
    }
    for v in &mut x {
        *v /= b_norm0;
    }
    let mut bx = Vec::new();
    let mut y = Vec::new();
    let mut ax = Vec::new();
    let mut mu = 0.0;
    let mut residual = f64::INFINITY;
    for iteration in 1..=MAX_EIG_ITERATIONS {
        b.mul(&x, &mut bx);
        factors.solve(&bx, &mut y);
        let b_norm = b.quadratic_form(&y).sqrt();
        if !(b_norm > 0.0) || !b_norm.is_finite() {
            return Err(Error::InvalidInput(
                "iteration collapsed; the pencil is numerically degenerate".into(),
            ));
        }
        for v in &mut y {
            *v /= b_norm;
        }
        std::mem::swap(&mut x, &mut y);
        a.mul(&x, &mut ax);
        b.mul(&x, &mut bx);
        let xax: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        let xbx: f64 = x.iter().zip(&bx).map(|(u, v)| u * v).sum();
        mu = xax / xbx;
        let mut defect_sq = 0.0;
        let mut ax_sq = 0.0;
        for i in 0..n {
            let r = ax[i] - mu * bx[i];
            defect_sq += r * r;
            ax_sq += ax[i] * ax[i];
        }
        residual = (defect_sq / ax_sq).sqrt();
        if residual <= tol {
            return Ok(EigEstimate {
                value: mu,
                iterations: iteration,
                residual_norm: residual,
                mesh: format!("pencil n={n}"),
            });
        }
    }
    let _ = mu;
    Err(Error::NoConvergence { max_iters: MAX_EIG_ITERATIONS, residual })
}

/// Best-constant estimate of the interior inequality on the truncated
/// ball: assembles the radial forms on the mesh and returns the smallest
/// pencil eigenvalue. Decreases toward `(d−2)²/4` as `δ ↓ 0` and the mesh
/// refines — slowly, because the infimum is not attained.
pub fn hardy_constant_estimate(d: Dimension, mesh: &RadialMesh) -> Result<EigEstimate> {
    let (a, b) = assemble_hardy_forms(d, mesh)?;
    let mut estimate = smallest_generalized_eig(&a, &b, DEFAULT_EIG_TOL)?;
    estimate.mesh = mesh.descriptor();
    Ok(estimate)
}
