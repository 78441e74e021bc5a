use thiserror::Error;

/// Errors produced by this crate.
///
/// Every fallible operation distinguishes the failure classes callers can
/// react to: shape problems, bad parameters, inputs that are not orthogonal
/// or numerically singular, internal numerical failures, and parse/IO
/// failures from the text formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is not orthogonal: {0}")]
    NotOrthogonal(String),

    #[error("singular or ill-conditioned input: {0}")]
    Singular(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
