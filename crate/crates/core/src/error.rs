use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("scaling factor must be nonzero")]
    InvalidScalar,

    #[error("weight mismatch: {left:?} vs {right:?}")]
    WeightMismatch { left: Vec<u32>, right: Vec<u32> },

    #[error("point is not wgcd-normalized")]
    NotNormalized,

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("degenerate path: {0}")]
    DegeneratePath(String),

    #[error("geodesic solver failed: {0}")]
    SolverFailed(String),

    #[error("distance oracle failed on pair ({i}, {j}): {source}")]
    Oracle {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("undefined invariant: {0}")]
    UndefinedInvariant(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
