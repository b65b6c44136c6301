use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HmxError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("field mismatch: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(i64, i64),
    #[error("{0} is not in the order of the module")]
    NotInOrder(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("series did not converge: {0}")]
    Convergence(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("certificate rejected: {0}")]
    Certificate(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, HmxError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(HmxError::Domain(msg.into()))
}
