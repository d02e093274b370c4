//! Error type shared across the lab.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("input contains a non-finite entry")]
    NonFinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvector basis is numerically singular (condition {condition:.3e})")]
    IllConditionedBasis { condition: f64 },

    #[error("evaluation point too close to a pole (solve residual {residual:.3e})")]
    PoleProximity { residual: f64 },

    #[error("invalid dimension n = {0}; need n >= 1")]
    InvalidDimension(usize),

    #[error("model kind does not match its inputs: {0}")]
    KindMismatch(String),

    #[error("coupling t = {0} outside the admissible range")]
    TOutOfRange(f64),

    #[error("level target undefined at t = {0}")]
    DegenerateT(f64),

    #[error("point {re}+{im}i lies on the support [-2, 2]")]
    OnSupport { re: f64, im: f64 },

    #[error("parameter outside the regime of validity: {0}")]
    RegimeViolation(String),

    #[error("negative argument {0}")]
    NegativeArgument(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vectors are not orthonormal: {0}")]
    NonOrthonormal(String),

    #[error("step refinement exhausted near t = {t} (unresolved close encounter)")]
    RefinementExhausted { t: f64 },

    #[error("point sets have different cardinalities: {0} vs {1}")]
    CardinalityMismatch(usize, usize),

    #[error("spectral gap {min_gap:.3e} too small for grid spacing {spacing:.3e}")]
    GapTooSmall { min_gap: f64, spacing: f64 },

    #[error("trajectories {i} and {j} collide near t = {t}")]
    CollisionAbort { t: f64, i: usize, j: usize },

    #[error("separation domains overlap")]
    OverlappingDomains,

    #[error("coupling coefficient degenerate (|c1| = {0:.3e})")]
    DegenerateCoupling(f64),

    #[error("invalid truncation K = {0}; need K >= 2")]
    InvalidTruncation(usize),

    #[error("truncation K = {k} too small for radius; need K >= {required}")]
    TruncationTooSmall { k: usize, required: usize },

    #[error("root count {roots} disagrees with winding number {winding}")]
    CountMismatch { roots: usize, winding: i64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient trials: got {got}, need at least {required}")]
    InsufficientTrials { got: usize, required: usize },

    #[error("eigensystem violates biorthogonality (max deviation {0:.3e})")]
    BiorthogonalityViolated(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("linear algebra backend error: {0}")]
    Backend(String),
}

impl From<ndarray_linalg::error::LinalgError> for LabError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        LabError::Backend(e.to_string())
    }
}

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        LabError::IoFailure { path: path.into(), source }
    }
}
