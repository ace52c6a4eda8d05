//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),

    #[error("document {0} has no tokens after tokenization")]
    EmptyDocument(String),

    #[error("n-gram has {len} tokens, this index supports 1..={max_n}")]
    NgramTooLong { len: usize, max_n: usize },

    #[error("empty n-gram")]
    EmptyNgram,

    #[error("index contains no documents")]
    EmptyIndex,

    #[error("invalid index file: {0}")]
    IndexFormat(String),

    #[error("unsupported index format version {found} (this build reads version {expected})")]
    IndexVersion { found: u32, expected: u32 },

    #[error("invalid spans: {0}")]
    SpanValidation(String),

    #[error("invalid path type label {0:?} (expected \"bridge\" or \"comparison\")")]
    InvalidPathLabel(String),

    #[error("{metrics} undefined: {reason}")]
    UndefinedCorrelation {
        metrics: &'static str,
        reason: String,
    },

    #[error("input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {required} items, got {got}")]
    TooFewItems { required: usize, got: usize },

    #[error("question ids do not align: {0}")]
    Alignment(String),

    #[error("no question pairs with distinct retrieval cost")]
    NoComparablePairs,

    #[error("invalid budget policy: {0}")]
    InvalidPolicy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
