use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index:?} out of range for {bound:?}")]
    IndexOutOfRange { index: Vec<i64>, bound: Vec<i64> },

    #[error("unknown symbol `{name}`; valid names: {}", valid.join(", "))]
    UnknownSymbol { name: String, valid: Vec<String> },

    #[error("unknown experiment `{name}`; valid kinds: {}", valid.join(", "))]
    UnknownExperiment { name: String, valid: Vec<String> },

    #[error("symbol `{0}` depends on physical variables and has no Fourier coefficients")]
    VariableCoefficient(String),

    #[error("matrix has non-real coefficient {value} at offset {offset:?}")]
    ComplexEntry { offset: Vec<i64>, value: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("restriction leaves {0} nodes; at least 2 are required")]
    DegenerateRestriction(usize),

    #[error("matrix of size {required} exceeds the memory budget of {budget}")]
    BudgetExceeded { required: usize, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
