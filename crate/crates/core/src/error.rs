//! Shared error type for every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode a laboratory operation can report.
///
/// Precondition violations (wrong dimension, degenerate inputs) are kept
/// distinct from numerical failures (quadrature or iteration not converging)
/// so that callers can map them to different exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension d={d} is too small for {context}: requires d >= {min}")]
    DimensionTooSmall { d: u32, min: u32, context: &'static str },

    #[error("point has {point_dim} coordinates but the ambient dimension is {ambient}")]
    DimensionMismatch { point_dim: usize, ambient: usize },

    #[error("evaluation point lies within {exclusion:e} of a singular pole")]
    PoleHit { exclusion: f64 },

    #[error("degenerate pole set: {0}")]
    DegeneratePoles(String),

    #[error("at least {min} poles required, got {got}")]
    TooFewPoles { got: usize, min: usize },

    #[error("distance to the boundary is not defined for this domain kind")]
    UnsupportedDomain,

    #[error("derivative order {order} is not supported for this ansatz")]
    UnsupportedOrder { order: u32 },

    #[error("positivity hypothesis fails: {0}")]
    PositivityViolation(String),

    #[error("adaptive quadrature exhausted {limit} subdivisions (best error estimate {err:e})")]
    MaxSubdivisions { limit: usize, err: f64 },

    #[error("exclusion ball centered at {pole:?} needs a declared local singularity exponent")]
    ExponentMissing { pole: Vec<f64> },

    #[error("integral diverges: {0}")]
    NonIntegrable(String),

    #[error("mesh has {nodes} nodes, need at least {min}")]
    MeshTooCoarse { nodes: usize, min: usize },

    #[error("eigen-iteration did not converge within {max_iters} iterations (residual {residual:e})")]
    NoConvergence { max_iters: usize, residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors that signal a malformed request rather than a
    /// numerical failure encountered mid-computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::MaxSubdivisions { .. } | Error::NoConvergence { .. }
        )
    }
}
