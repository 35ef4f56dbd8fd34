//! Domain and potential descriptors: ambient dimension, evaluation points,
//! singular pole sets, the finite catalog of analytic domains, and pointwise
//! evaluation of the singular weights, together with geometric helpers
//! (pole separation, distance to the boundary).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default radius around a pole inside which evaluation refuses to proceed,
/// in domain units. Keeps every quadrature path free of infinite samples.
pub const DEFAULT_POLE_EXCLUSION: f64 = 1e-9;

/// Ambient dimension `d >= 2`. Operations state their own stricter lower
/// bounds (interior Hardy needs `d >= 3`, the fourth-order inequality
/// `d >= 5`, ...) via [`Dimension::require_at_least`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall { d, min: 2, context: "any setting" });
        }
        Ok(Dimension(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// Enforces an operation-specific lower bound.
    pub fn require_at_least(self, min: u32, context: &'static str) -> Result<()> {
        if self.0 < min {
            return Err(Error::DimensionTooSmall { d: self.0, min, context });
        }
        Ok(())
    }
}

impl TryFrom<u32> for Dimension {
    type Error = Error;
    fn try_from(d: u32) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for u32 {
    fn from(d: Dimension) -> u32 {
        d.0
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point of `R^d`, stored as a dense coordinate vector. Dimension
/// mismatches are hard errors in every operation, never silent broadcasts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn zeros(d: usize) -> Self {
        Point(vec![0.0; d])
    }

    /// The unit vector along the last coordinate axis.
    pub fn last_axis(d: Dimension) -> Self {
        let mut coords = vec![0.0; d.as_usize()];
        coords[d.as_usize() - 1] = 1.0;
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn last_coord(&self) -> f64 {
        *self.0.last().expect("point has at least one coordinate")
    }

    /// Checks that the point lives in ambient dimension `d`.
    pub fn check_dim(&self, d: Dimension) -> Result<()> {
        if self.dim() != d.as_usize() {
            return Err(Error::DimensionMismatch { point_dim: self.dim(), ambient: d.as_usize() });
        }
        Ok(())
    }
}

/// A finite set of pairwise-distinct singular poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PoleSet {
    poles: Vec<Point>,
}

impl PoleSet {
    pub fn new(poles: Vec<Point>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::DegeneratePoles("the pole set is empty".into()));
        }
        let d0 = poles[0].dim();
        for p in &poles {
            if p.dim() != d0 {
                return Err(Error::DimensionMismatch { point_dim: p.dim(), ambient: d0 });
            }
        }
        for i in 0..poles.len() {
            for j in (i + 1)..poles.len() {
                if poles[i].dist(&poles[j]) == 0.0 {
                    return Err(Error::DegeneratePoles(format!(
                        "poles {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(PoleSet { poles })
    }

    pub fn n(&self) -> usize {
        self.poles.len()
    }

    pub fn poles(&self) -> &[Point] {
        &self.poles
    }

    pub fn dim(&self) -> usize {
        self.poles[0].dim()
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.poles.len() {
            for j in (i + 1)..self.poles.len() {
                m = m.min(self.poles[i].dist(&self.poles[j]));
            }
        }
        m
    }
}

impl TryFrom<Vec<Point>> for PoleSet {
    type Error = Error;
    fn try_from(poles: Vec<Point>) -> Result<Self> {
        PoleSet::new(poles)
    }
}

impl From<PoleSet> for Vec<Point> {
    fn from(ps: PoleSet) -> Vec<Point> {
        ps.poles
    }
}

/// Half the minimum pairwise distance between poles: the largest radius at
/// which the balls around distinct poles stay disjoint.
pub fn pole_separation(poles: &PoleSet) -> Result<f64> {
    if poles.n() < 2 {
        return Err(Error::DegeneratePoles(
            "pole separation needs at least two poles".into(),
        ));
    }
    Ok(poles.min_pairwise_distance() / 2.0)
}

/// The finite catalog of analytic domains the laboratory works on.
///
/// Serializes to a JSON object with a `"kind"` discriminator; the exact field
/// names are documented in `schema/jobconfig.schema.json` at the repository
/// root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DomainSpec {
    WholeSpace,
    /// The open half-space `x_d > 0`.
    HalfSpace,
    Ball {
        center: Point,
        radius: f64,
    },
    /// The open exterior of a closed ball.
    ExteriorBall {
        center: Point,
        radius: f64,
    },
    /// `domain ∩ B_radius(0)`: an inner domain clipped to a ball around the
    /// origin, used for local certificates near a boundary point.
    BallIntersection {
        domain: Box<DomainSpec>,
        radius: f64,
    },
}

impl DomainSpec {
    /// Checks radii and center dimensions against the ambient dimension.
    pub fn validate(&self, d: Dimension) -> Result<()> {
        match self {
            DomainSpec::WholeSpace | DomainSpec::HalfSpace => Ok(()),
            DomainSpec::Ball { center, radius } | DomainSpec::ExteriorBall { center, radius } => {
                center.check_dim(d)?;
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                Ok(())
            }
            DomainSpec::BallIntersection { domain, radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "intersection radius must be positive, got {radius}"
                    )));
                }
                domain.validate(d)
            }
        }
    }

    /// Membership in the open domain.
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            DomainSpec::WholeSpace => true,
            DomainSpec::HalfSpace => x.last_coord() > 0.0,
            DomainSpec::Ball { center, radius } => x.dist(center) < *radius,
            DomainSpec::ExteriorBall { center, radius } => x.dist(center) > *radius,
            DomainSpec::BallIntersection { domain, radius } => {
                domain.contains(x) && x.norm() < *radius
            }
        }
    }

    /// Signed distance to the boundary: positive inside the domain,
    /// negative outside. Smoothly extends the boundary distance across the
    /// boundary, which keeps finite-difference stencils near the boundary
    /// well defined. The whole space has no boundary and reports
    /// [`Error::UnsupportedDomain`].
    pub fn signed_boundary_distance(&self, x: &Point) -> Result<f64> {
        Ok(match self {
            DomainSpec::WholeSpace => return Err(Error::UnsupportedDomain),
            DomainSpec::HalfSpace => x.last_coord(),
            DomainSpec::Ball { center, radius } => radius - x.dist(center),
            DomainSpec::ExteriorBall { center, radius } => x.dist(center) - radius,
            DomainSpec::BallIntersection { domain, radius } => {
                let from_cap = radius - x.norm();
                let from_inner = match domain.as_ref() {
                    // A cap of the whole space is just the ball around 0.
                    DomainSpec::WholeSpace => from_cap,
                    other => other.signed_boundary_distance(x)?,
                };
                from_inner.min(from_cap)
            }
        })
    }

    /// Distance from a point of the closure to the boundary.
    ///
    /// Only kinds with a closed-form distance support this; the whole space
    /// has no boundary and reports [`Error::UnsupportedDomain`].
    pub fn distance_to_boundary(&self, x: &Point) -> Result<f64> {
        let rho = self.signed_boundary_distance(x)?;
        if rho < 0.0 {
            return Err(Error::InvalidInput(format!(
                "point lies outside the domain closure (signed distance {rho:e})"
            )));
        }
        Ok(rho)
    }
}

/// A singular weight `W = scale · V`, where `V` is one of the catalog shapes.
///
/// Serializes to a JSON object carrying the `"kind"` discriminator of the
/// shape together with a `"scale"` field (the multiplicative constant mu).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    /// The positive multiplicative constant in front of the shape.
    pub scale: f64,
}

/// The catalog of singular weight shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PotentialKind {
    /// `1/|x−pole|²`.
    InverseSquare { pole: Point },
    /// The pairwise product form
    /// `Σ_{i<j} |a_i−a_j|² / (|x−a_i|²·|x−a_j|²)`, positive everywhere off
    /// the poles and summable interactions between every pair.
    Multipolar { poles: PoleSet },
    /// The plain superposition `Σ_i 1/|x−a_i|²`.
    MultipolarSum { poles: PoleSet },
    /// `1/|x−pole|⁴`, the fourth-order weight.
    InverseQuartic { pole: Point },
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, scale: f64) -> Result<Self> {
        let spec = PotentialSpec { kind, scale };
        spec.validate_shape()?;
        Ok(spec)
    }

    /// `1/|x|²` scaled by `scale`, the single-pole weight at the origin.
    pub fn inverse_square_origin(d: Dimension, scale: f64) -> Result<Self> {
        PotentialSpec::new(PotentialKind::InverseSquare { pole: Point::zeros(d.as_usize()) }, scale)
    }

    /// `1/|x|⁴` scaled by `scale`, the fourth-order weight at the origin.
    pub fn inverse_quartic_origin(d: Dimension, scale: f64) -> Result<Self> {
        PotentialSpec::new(PotentialKind::InverseQuartic { pole: Point::zeros(d.as_usize()) }, scale)
    }

    /// The pairwise product form over the given poles, scaled by `scale`.
    pub fn multipolar_product(poles: PoleSet, scale: f64) -> Result<Self> {
        PotentialSpec::new(PotentialKind::Multipolar { poles }, scale)
    }

    /// Scale positivity and per-kind structural constraints.
    pub fn validate_shape(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "potential scale must be positive, got {}",
                self.scale
            )));
        }
        if let PotentialKind::Multipolar { poles } = &self.kind {
            if poles.n() < 2 {
                return Err(Error::TooFewPoles { got: poles.n(), min: 2 });
            }
        }
        Ok(())
    }

    /// Structural constraints plus dimension agreement with the ambient space.
    pub fn validate(&self, d: Dimension) -> Result<()> {
        self.validate_shape()?;
        match &self.kind {
            PotentialKind::InverseSquare { pole } | PotentialKind::InverseQuartic { pole } => {
                pole.check_dim(d)
            }
            PotentialKind::Multipolar { poles } | PotentialKind::MultipolarSum { poles } => {
                if poles.dim() != d.as_usize() {
                    return Err(Error::DimensionMismatch {
                        point_dim: poles.dim(),
                        ambient: d.as_usize(),
                    });
                }
                Ok(())
            }
        }
    }

    /// All singular points of the weight.
    pub fn singular_points(&self) -> Vec<Point> {
        match &self.kind {
            PotentialKind::InverseSquare { pole } | PotentialKind::InverseQuartic { pole } => {
                vec![pole.clone()]
            }
            PotentialKind::Multipolar { poles } | PotentialKind::MultipolarSum { poles } => {
                poles.poles().to_vec()
            }
        }
    }

    /// Distance from `x` to the nearest singular point.
    pub fn distance_to_singular_set(&self, x: &Point) -> f64 {
        self.singular_points()
            .iter()
            .map(|p| x.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Pointwise evaluation `scale · V(x)`; strictly positive off the poles.
    ///
    /// Reports [`Error::PoleHit`] when `x` comes within `exclusion` of any
    /// singular point, so downstream quadrature never sees infinite samples.
    pub fn eval(&self, x: &Point, exclusion: f64) -> Result<f64> {
        let v = match &self.kind {
            PotentialKind::InverseSquare { pole } => {
                x.check_dim(Dimension::new(pole.dim() as u32)?)?;
                let r = x.dist(pole);
                if r <= exclusion {
                    return Err(Error::PoleHit { exclusion });
                }
                1.0 / (r * r)
            }
            PotentialKind::InverseQuartic { pole } => {
                x.check_dim(Dimension::new(pole.dim() as u32)?)?;
                let r = x.dist(pole);
                if r <= exclusion {
                    return Err(Error::PoleHit { exclusion });
                }
                1.0 / (r * r * r * r)
            }
            PotentialKind::Multipolar { poles } => {
                if x.dim() != poles.dim() {
                    return Err(Error::DimensionMismatch {
                        point_dim: x.dim(),
                        ambient: poles.dim(),
                    });
                }
                let dist_sq: Vec<f64> = poles
                    .poles()
                    .iter()
                    .map(|a| {
                        let r = x.dist(a);
                        if r <= exclusion {
                            return Err(Error::PoleHit { exclusion });
                        }
                        Ok(r * r)
                    })
                    .collect::<Result<_>>()?;
                let ps = poles.poles();
                let mut sum = 0.0;
                for i in 0..ps.len() {
                    for j in (i + 1)..ps.len() {
                        let sep_sq = {
                            let s = ps[i].dist(&ps[j]);
                            s * s
                        };
                        sum += sep_sq / (dist_sq[i] * dist_sq[j]);
                    }
                }
                sum
            }
            PotentialKind::MultipolarSum { poles } => {
                if x.dim() != poles.dim() {
                    return Err(Error::DimensionMismatch {
                        point_dim: x.dim(),
                        ambient: poles.dim(),
                    });
                }
                let mut sum = 0.0;
                for a in poles.poles() {
                    let r = x.dist(a);
                    if r <= exclusion {
                        return Err(Error::PoleHit { exclusion });
                    }
                    sum += 1.0 / (r * r);
                }
                sum
            }
        };
        Ok(self.scale * v)
    }
}
