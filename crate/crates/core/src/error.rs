//! Error type shared by every module, classified so the CLI can map
//! failures onto exit codes (usage / data / internal).

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong while loading, transforming, or
/// evaluating alignment data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: expected 3 tab-separated fields, found {found}")]
    TripleArity {
        path: PathBuf,
        line: usize,
        found: usize,
    },

    #[error("{path}:{line}: expected 2 tab-separated fields, found {found}")]
    LinkArity {
        path: PathBuf,
        line: usize,
        found: usize,
    },

    #[error("{path}:{line}: empty field in triple")]
    EmptyField { path: PathBuf, line: usize },

    #[error("unresolvable entity surface {surface:?}")]
    UnknownSurface { surface: String },

    #[error("entity index {index} out of range (graph has {count} entities)")]
    UnknownEntity { index: u32, count: usize },

    #[error(
        "duplicate {side} entity {surface:?} in alignment links (gold alignment must be 1-to-1)"
    )]
    DuplicateLink { side: &'static str, surface: String },

    #[error("split ratio must have three positive parts")]
    BadRatio,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad matrix header: {reason}")]
    MatrixHeader { path: PathBuf, reason: String },

    #[error("{path}: dimension mismatch: {reason}")]
    DimensionMismatch { path: PathBuf, reason: String },

    #[error("{path}: truncated payload: expected {expected} bytes of scores, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}:{line}: bad sparse matrix entry: {reason}")]
    SparseEntry {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("matrix row/col orders do not match: {reason}")]
    OrderMismatch { reason: String },

    #[error("matrix is empty")]
    EmptyMatrix,

    #[error("score domain must be frequency-normalized (values in [0,1]); {context}")]
    NotFrequencyNormalized { context: String },

    #[error("non-finite score at row {row}, col {col}")]
    NonFiniteScore { row: usize, col: usize },

    #[error("confidence grid is empty")]
    EmptyGrid,

    #[error("grid value {value} is not strictly inside (0, 1)")]
    BadGridValue { value: f64 },

    #[error("no validation pairs supplied")]
    NoValidationPairs,

    #[error("no ranks to aggregate")]
    NoRanks,

    #[error("prediction set does not cover gold source {surface:?}")]
    MissingPrediction { surface: String },

    #[error("config: {reason}")]
    Config { reason: String },

    #[error("pipeline stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Attach pipeline stage context.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Exit code class: 2 for data/input errors, 3 for internal faults.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
