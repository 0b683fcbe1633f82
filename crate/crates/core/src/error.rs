use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A nonzero value sits in a block the pattern forbids. Block coordinates are 1-based.
    #[error("pattern violation at block ({row}, {col}): {detail}")]
    PatternViolation {
        row: usize,
        col: usize,
        detail: String,
    },

    /// A local gramian failed its Cholesky step. `r`, `l` locate the pyramid node (1-based).
    #[error("matrix is not positive definite: local gramian at (r={r}, l={l}) has pivot {pivot:e}")]
    Definiteness { r: usize, l: usize, pivot: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// Index sets are 0-based row indices.
    #[error("graph is disconnected into {} components", components.len())]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("classical scaling is degenerate: leading eigenvalue {0:e} is not positive")]
    DegenerateConfiguration(f64),

    #[error("alignment impossible at skeleton step {step}: no overlap with earlier members")]
    AlignmentImpossible { step: usize },

    #[error("configuration is incomplete: coordinate {0} is undefined")]
    IncompleteConfiguration(usize),

    #[error("matrix is not the distance matrix of a permutation: {0}")]
    NotPermutationMetric(String),

    #[error("cannot reconstruct points: {0}")]
    Reconstruction(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }
}
