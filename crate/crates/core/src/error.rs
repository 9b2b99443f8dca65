use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid probability vector: {0}")]
    InvalidPmf(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("size limit exceeded: {what} needs {needed}, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        needed: f64,
        limit: f64,
    },

    #[error("type {probs:?} is not a valid type for blocklength {n}")]
    NonIntegralType { probs: Vec<f64>, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
