//! Corpus-curation toolkit for denoising seq2seq pre-training.
//!
//! The crate covers the non-neural machinery around pre-training a
//! BART-style model on web text:
//!
//! * [`segment`] — rule-based sentence segmentation and text statistics
//! * [`features`] — per-page anomaly heuristics
//! * [`isoforest`] — Isolation Forest fit/score, from scratch
//! * [`cleaner`] — two-level corpus cleaning (page rules + sentence rules)
//! * [`tokenizer`] — unigram-LM subword inference (Viterbi)
//! * [`noising`] — dynamic denoising example generator (sentence
//!   permutation + Poisson span infilling)
//! * [`analysis`] — tokenizer-efficiency and training-budget calculators
//! * [`enlarge`] — checkpoint depth-doubling by layer interleaving
//!
//! See the `examples/` directory for a runnable walkthrough of each
//! capability, and the `webcorpus` binary for the file-based pipeline.

pub mod analysis;
pub mod cleaner;
pub mod cli;
pub mod enlarge;
pub mod features;
pub mod isoforest;
pub mod manifest;
pub mod noising;
pub mod segment;
pub mod tokenizer;
pub mod util;


pub use cleaner::{CleaningConfig, Page, Report, Verdict};
pub use features::PageFeatures;
pub use isoforest::{ForestConfig, IsolationForest};
pub use noising::{NoisingConfig, TrainingExample};
pub use segment::Sentence;
pub use tokenizer::Vocab;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("page has no sentences")]
    EmptyPage,
    #[error("document has no usable sentences")]
    EmptyDocument,
    #[error("need at least {needed} points to fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("anomaly filtering enabled but page {0} has no decision score")]
    MissingScore(String),
    #[error("duplicate piece {0:?} in vocabulary")]
    DuplicatePiece(String),
    #[error("unknown token id {0}")]
    UnknownId(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("tensor name {0:?} does not follow the layer naming convention")]
    NamingConventionViolation(String),
    #[error("target layer count {tgt} is not double the source layer count {src}")]
    LayerCountMismatch { src: usize, tgt: usize },
    #[error("donor checkpoint is missing tensor {0:?}")]
    MissingTensor(String),
    #[error("shape mismatch for tensor {0:?}")]
    ShapeMismatch(String),
    #[error("manifest checksum mismatch (file corrupt)")]
    ChecksumMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
