use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate variable label `{0}`")]
    DuplicateLabel(String),
    #[error("variable `{label}` has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { label: String, lower: f64, upper: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("model is unbounded")]
    Unbounded,
    #[error("LP relaxation failed: {0}")]
    Relaxation(String),
    #[error("malformed solution file: {0}")]
    MalformedSolution(String),
    #[error("external solver failed: {0}")]
    External(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
