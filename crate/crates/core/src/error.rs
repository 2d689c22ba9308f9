use thiserror::Error;

/// Errors produced by the q-calculus routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("invalid base q = {0}: require q > 0 and q != 1")]
    InvalidBase(f64),

    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("{op} did not converge within {terms} terms")]
    Convergence { op: &'static str, terms: usize },

    #[error("{op} produced a non-finite value at x = {x}")]
    NonFinite { op: &'static str, x: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl QError {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        QError::Domain { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, QError>;
