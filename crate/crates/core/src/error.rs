//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, validation, solving, and encoding.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("predicate `{pred}` declared with arity {declared}, used with arity {used}")]
    ArityMismatch {
        pred: String,
        declared: usize,
        used: usize,
    },

    #[error("equality atom used but equality is not enabled in the signature")]
    EqualityDisabled,

    #[error("variable x{0} is unbound")]
    UnboundVariable(usize),

    #[error("invalid signature declaration: {0}")]
    Signature(String),

    #[error("formula is not fluted: {0}")]
    NotFluted(String),

    #[error("input is outside the supported fragment: {0}")]
    WrongFragment(String),

    #[error("invalid resolution step: {0}")]
    Resolution(String),

    #[error("resource limit exceeded in {stage}: {detail}")]
    Resource { stage: String, detail: String },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for a resource-cap error.
    pub fn resource(stage: &str, detail: impl Into<String>) -> Self {
        Error::Resource {
            stage: stage.to_string(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
