use thiserror::Error;

use crate::problem::Vector;

/// Errors raised by the solvers and the problem bookkeeping.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported problem: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The iteration cap was hit before the stopping certificate was met.
    /// Carries the best iterate found so far.
    #[error("budget of {iterations} iterations exhausted, certified bound {certified:.3e}")]
    BudgetExceeded {
        iterations: usize,
        certified: f64,
        best: Box<Vector>,
    },

    #[error("iteration budget is zero")]
    ZeroBudget,

    #[error("missing spectral data: {0}")]
    MissingSpectralData(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(SolverError::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}
