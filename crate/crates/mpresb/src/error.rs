//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Direct factorization of a matrix expected to be positive definite hit
    /// a nonpositive pivot. Reported distinctly so callers can tell a bad
    /// matrix from a solver bug.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    /// Dense materialization is a debugging/verification device; refuse
    /// silently burning memory on large problems.
    #[error("dense guard exceeded: dimension {dim} is larger than the dense limit {max}")]
    DenseGuard { dim: usize, max: usize },

    #[error(
        "{what} did not converge after {iterations} iterations (relative residual {residual:.3e})"
    )]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
