use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid coverage error: {0}")]
    Coverage(String),
    #[error("expected event count {expected:.3e} exceeds the limit {limit:.1e}")]
    Overflow { expected: f64, limit: f64 },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("covariance matrix is singular or not positive definite")]
    SingularCovariance,
    #[error("consistency check failed: {0}")]
    Check(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
