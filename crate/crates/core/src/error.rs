use thiserror::Error;

/// Errors raised by the channel builders, solvers and analyses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("budget exceeded: {dimension} needs {requested} entries, budget is {budget}")]
    BudgetExceeded {
        dimension: String,
        requested: u128,
        budget: u128,
    },

    #[error("no convergence after {iterations} iterations (last gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
