use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// JSON syntax or schema error, with the field path.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// A data-model invariant does not hold.
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("plan does not match instance: {0}")]
    Dimension(String),
    #[error(transparent)]
    Milp(#[from] firebreak_milp::MilpError),
    #[error("solver failed: {0}")]
    Solver(String),
    /// Limits of the brute-force oracle exceeded.
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("invalid parameter: {0}")]
    Param(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
