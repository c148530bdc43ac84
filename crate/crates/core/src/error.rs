use thiserror::Error;

/// Errors raised anywhere in the certification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed numeric input: non-finite coordinates, bad exponents, etc.
    #[error("invalid input: {0}")]
    Input(String),

    /// A lookup outside the declared index sets of an operator.
    #[error("index outside operator domain: {0}")]
    Domain(String),

    /// The requested method cannot handle this matrix (e.g. complex entries for p = 1).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A computation would exceed a hard size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A documented precondition was not met (e.g. N0 not larger than the bandwidth).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Spec document could not be parsed or validated.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Something that should be impossible, e.g. an infeasible LP.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
