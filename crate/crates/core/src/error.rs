use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("search budget exceeded: {0}")]
    Budget(String),
    #[error("lemma violation: {0}")]
    Violation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
