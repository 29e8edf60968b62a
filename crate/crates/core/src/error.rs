//! Error type shared by all solver components.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation was handed an argument outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Parameter outside the mathematical domain (e.g. Re(s) <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two objects that must share a grid (or frequency) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Dense-path guard: the requested matrix would exceed the size cap.
    #[error("size guard exceeded: {what} needs {needed} unknowns, cap is {cap}")]
    SizeGuard {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// A matrix factorization hit a pivot that is zero to tolerance.
    #[error("singular system: {0}")]
    Singular(String),

    /// A frequency solve inside the pipeline failed to converge.
    #[error("frequency solve at node {index} (s = {s}) failed: {reason}")]
    SolveFailed {
        index: usize,
        s: Complex64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
