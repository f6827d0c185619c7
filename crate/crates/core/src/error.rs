use thiserror::Error;

use crate::model::Violation;

/// Errors raised by the library. Verification failures are not errors: they
/// are returned as failing [`Report`](crate::verification::Report)s.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid instance: {}", join_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("bidder {bidder} is never allocated for the given opponent signals")]
    NoThreshold { bidder: usize },

    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),

    #[error("strategy of bidder {bidder} failed: {message}")]
    Strategy { bidder: usize, message: String },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    /// A property the mechanism relies on did not hold during a run.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
