use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular (rank {rank} < {size})")]
    SingularMatrix { rank: usize, size: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("row space of the first basis is not contained in the second")]
    NotASubspace,

    #[error("{what} exceeds cap: {value} > {cap}")]
    CapExceeded { what: &'static str, value: u128, cap: u128 },

    #[error("bad length {len}: {reason}")]
    BadLength { len: usize, reason: &'static str },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("bad budget k = {k} for blocklength {n}")]
    BadBudget { k: usize, n: usize },

    #[error("successive-cancellation decoding failed at index {index} (0-based)")]
    DecodeFailure { index: usize },

    #[error("certificate is not verified")]
    UnverifiedCertificate,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
