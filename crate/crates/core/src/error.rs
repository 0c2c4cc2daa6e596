//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// File could not be opened or read at all.
    #[error("unreadable file {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    /// File was readable but not in a supported encoding.
    #[error("unsupported encoding in {path}: {reason}")]
    UnsupportedEncoding { path: PathBuf, reason: String },

    #[error("failed to write {path}: {reason}")]
    WriteFailed { path: PathBuf, reason: String },

    /// A precondition on an operation's input was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Audio shorter than what the analysis window requires.
    #[error("segment too short: {0}")]
    SegmentTooShort(String),

    /// Tabular data violated the CSV schema contract.
    #[error("schema error: {0}")]
    Schema(String),

    /// Numeric input contained NaN or infinity.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// A model/table dimensionality mismatch.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested operation is undefined for this learner.
    #[error("unsupported for learner {learner}: {reason}")]
    UnsupportedLearner { learner: String, reason: String },

    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
