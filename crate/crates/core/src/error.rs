use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} samples, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("{count} grid point(s) fall below the node threshold (first: {first:?})")]
    Node { count: usize, first: Vec<usize> },

    #[error("every grid point is masked as a node")]
    AllMasked,

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-solvable periodic Poisson source: mean {mean:e} exceeds {tolerance:e}")]
    NonSolvable { mean: f64, tolerance: f64 },

    #[error("CFL violation: c*dt = {cdt:e} exceeds {limit:e}")]
    Cfl { cdt: f64, limit: f64 },

    #[error("need at least {required} snapshots, got {actual}")]
    InsufficientSnapshots { required: usize, actual: usize },

    #[error("snapshots are not equally spaced in time (step {index})")]
    UnequalSpacing { index: usize },

    #[error("phase branch jump between snapshots at {count} point(s) (first: {first})")]
    BranchJump { count: usize, first: usize },

    #[error("snapshot header error: {0}")]
    Header(String),

    #[error("snapshot shape error: {0}")]
    SnapshotShape(String),

    #[error("CSV output error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
