use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (edge list, adjacency list, labels).
    #[error("parse error: {0}")]
    Parse(String),

    /// Caller misuse of an oracle or estimator entry point. Usage errors are
    /// not counted against query budgets.
    #[error("usage error: {0}")]
    Usage(String),

    /// Generator parameters are infeasible or edge-swap repair did not converge.
    #[error("generation error: {0}")]
    Generation(String),

    /// Internal invariant breach; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
