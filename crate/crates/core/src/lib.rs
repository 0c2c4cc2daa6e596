//! Voice-based screening pipeline for Parkinson's disease.
//!
//! End to end: WAV ingest and cleanup ([`audio`]), a 71-dimensional
//! acoustic feature vector per 10-second segment ([`features`]), tabular
//! interchange and statistics ([`dataset`]), four feature-selection
//! strategies ([`select`]), seven from-scratch classifiers ([`learn`]),
//! group-aware cross-validated evaluation with randomized hyperparameter
//! search ([`eval`]), and Shapley-value attributions ([`explain`]).
//!
//! Everything is deterministic under a fixed seed: identical inputs and
//! configuration reproduce identical models, reports, and explanations,
//! regardless of thread scheduling.

pub mod audio;
pub mod dataset;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod explain;
mod linalg;
pub mod features;
pub mod learn;
pub mod select;
pub mod synth;

pub use error::{Error, Result};
