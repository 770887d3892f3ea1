use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration is not feasible: {0}")]
    InfeasibleConfiguration(String),
    #[error("boundary condition admits no feasible interior configuration")]
    InfeasibleBoundary,
    #[error("problem too large: {required} states exceed the cap of {cap}; {hint}")]
    TooLarge { required: f64, cap: f64, hint: String },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
