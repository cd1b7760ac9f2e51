use thiserror::Error;

use crate::semiring::Semiring;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("semiring instance mismatch: {0} vs {1}")]
    InstanceMismatch(Semiring, Semiring),
    #[error("object mismatch: {0}")]
    ObjectMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("unsupported for the {instance} instance: {what}")]
    Unsupported { instance: Semiring, what: String },
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("not idempotent: {0}")]
    NotIdempotent(String),
    #[error("splitting failed: {0}")]
    SplitFailed(String),
    #[error("invalid factor indices: {0}")]
    InvalidIndices(String),
    #[error("not a parallel pair: {0}")]
    NotParallel(String),
    #[error("unbound name: {0}")]
    UnboundName(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("not a lax cone: leg for {f:?} does not laxly commute over {g:?}")]
    NotLaxCone { f: Vec<usize>, g: Vec<usize> },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
