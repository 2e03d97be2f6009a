use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid linear map: {0}")]
    InvalidMap(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A requirement of the chosen algorithm is violated and no override was given.
    #[error("requirement violated: {0}")]
    Requirement(String),

    #[error("gradient undefined for non-convex set ({0})")]
    NonConvexGradient(&'static str),

    #[error("{subproblem} subproblem: inner solver did not converge in {iterations} iterations (last step {last_step:e})")]
    InnerSolver {
        subproblem: &'static str,
        iterations: usize,
        last_step: f64,
    },

    #[error("{subproblem} subproblem is not exactly solvable: {reason}")]
    Unsolvable {
        subproblem: &'static str,
        reason: String,
    },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("certificate: {0}")]
    Certificate(String),

    #[error("generator: {0}")]
    Generator(String),

    #[error("format error at {path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        })
    }
}
