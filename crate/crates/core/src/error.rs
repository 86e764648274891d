use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SlepError>;

#[derive(Debug, Error)]
pub enum SlepError {
    #[error("order exceeds degree: m = {m}, l = {l}")]
    OrderExceedsDegree { l: i64, m: i64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("degenerate boundary")]
    DegenerateBoundary,

    #[error("non-simple boundary: edges {1} and {2} of loop {0} intersect")]
    NonSimpleBoundary(usize, usize, usize),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("grid under-resolved: {rings} theta rings for band-limit {l} (need at least {need})")]
    GridUnderResolved { rings: usize, l: usize, need: usize },

    #[error("region mask empty at this resolution")]
    EmptyMask,

    #[error("conventional method memory limit: L = {l} exceeds the configured limit {limit}")]
    MemoryLimit { l: usize, limit: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("band-limit mismatch: {0} vs {1}")]
    BandLimitMismatch(usize, usize),

    #[error("zero vector has no concentration ratio")]
    ZeroVector,

    #[error("signal orthogonal to weighted cap basis")]
    OrthogonalToCapBasis,

    #[error("region exceeds hemisphere coverage of a proper cap")]
    RegionExceedsCap,

    #[error("eigenvalue {value:e} below the PSD guard {guard:e}")]
    NegativeEigenvalue { value: f64, guard: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SlepError {
    /// True for failures raised by a numeric guard rather than bad input.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            SlepError::MemoryLimit { .. }
                | SlepError::EmptyMask
                | SlepError::NegativeEigenvalue { .. }
                | SlepError::Eigen(_)
        )
    }
}
