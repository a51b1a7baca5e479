use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("index ({i}, {j}) out of range for {nx}x{ny} grid")]
    Index {
        i: usize,
        j: usize,
        nx: usize,
        ny: usize,
    },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    Length { expected: usize, actual: usize },

    #[error("non-finite value at linear index {index}")]
    NonFinite { index: usize },

    #[error("negative standard deviation at linear index {index}")]
    NegativeSigma { index: usize },

    #[error("ensemble needs at least 2 members, got {0}")]
    InsufficientEnsemble(usize),

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid range: lo ({lo}) must be below hi ({hi})")]
    Range { lo: f64, hi: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("parallel kernel panicked in chunk starting at index {index}")]
    KernelPanic { index: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
