//! Numerical laboratory for sharp Hardy, Rellich, and Hardy–Rellich inequalities.
//!
//! The crate packages five independent numerical routes to the optimal
//! constants of second- and fourth-order functional inequalities with
//! inverse-square and inverse-quartic weights:
//!
//! * [`constants`] — every closed-form optimal constant and one-dimensional
//!   optimization, in exact rational arithmetic where the inputs are integers;
//! * [`supersolution`] — certificate checking: a positive function whose
//!   operator residual is nonnegative on a sample grid certifies a
//!   quadratic-form lower bound;
//! * [`rayleigh`] — Rayleigh quotients of explicit minimizing families,
//!   demonstrating convergence to each optimal constant from above;
//! * [`spectrum`] — smallest generalized eigenvalues of discretized radial
//!   quadratic forms, an independent variational route to the same constants;
//! * [`identities`] — randomized verification of the integral identities the
//!   proofs rest on, with analytically differentiated test functions.
//!
//! [`geometry`] and [`quadrature`] supply the shared domain/potential
//! descriptors and the singularity-aware integration engines.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod identities;
pub mod quadrature;
pub mod rayleigh;
pub mod spectrum;
pub mod supersolution;

pub use error::{Error, Result};

/// Caps the global thread pool at `HF_THREADS` threads when that environment
/// variable is set to a positive integer. Call once at process start, before
/// any parallel work; later calls (or an unset/invalid variable) leave the
/// pool untouched.
pub fn configure_thread_cap_from_env() {
    if let Ok(raw) = std::env::var("HF_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n > 0 {
                // Ignore the error: the pool may already be initialized.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
