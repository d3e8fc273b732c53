//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sample has zero dispersion; no bandwidth can be derived")]
    ZeroDispersion,

    #[error("quadrature failed to converge to the requested tolerance")]
    QuadratureNonConvergence,

    #[error("degenerate local fit at {failed} of {total} grid points (> 5% budget)")]
    DegenerateFit { failed: usize, total: usize },

    #[error("all candidate bandwidth scores are non-finite")]
    AllScoresNonFinite,

    #[error("{dropped} of {total} bootstrap replicates dropped (> 10% budget)")]
    TooManyDropped { dropped: usize, total: usize },

    #[error("level set is empty on the evaluation grid")]
    EmptyLevelSet,

    #[error("no roots of the regression estimate in the grid range")]
    NoRoots,

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("no admissible grid points for the weighted sup metric")]
    EmptyAdmissibleSet,

    #[error("coverage study: {failed} of {total} trials failed (> 10% budget)")]
    TooManyFailedTrials { failed: usize, total: usize },
}
