use thiserror::Error;

/// Errors raised by the library. Identity violations are not errors; they are
/// returned as values by the checking functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("ill-conditioned input: {0}")]
    IllConditioned(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown id `{0}`")]
    Lookup(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;
