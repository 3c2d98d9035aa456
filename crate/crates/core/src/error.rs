use thiserror::Error;

/// Errors raised by mesh generation, assembly, factorization and the iterative solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not positive definite: pivot {pivot:e} at column {column}")]
    NotPositiveDefinite { column: usize, pivot: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("meshes are not nested: fine cell {fine_cell} is not contained in any coarse cell")]
    NotNested { fine_cell: usize },

    #[error("degenerate iterate: {0}")]
    Degenerate(String),

    #[error("penalty iteration did not reach the divergence tolerance after {iterations} iterations (|div z| = {achieved:e})")]
    PenaltyNotConverged { iterations: usize, achieved: f64 },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("subspace basis is rank deficient")]
    RankDeficient,

    #[error("problem too large for dense algebra: {dofs} dofs (limit {limit})")]
    TooLarge { dofs: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
