use thiserror::Error;

/// Crate-wide error type. Variants mirror the contract failures of the
/// individual modules so callers (and the CLI exit-code protocol) can tell
/// "checked and false" apart from "could not check".
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty kernel: manifold has no projective factor (d = 0)")]
    EmptyKernel,

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("ODE integration failed: {0}")]
    IntegrationFailure(String),

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("partial cover: {uncovered} of {total} net directions uncovered")]
    PartialCover { uncovered: usize, total: usize },

    #[error("mean-zero violation: outer extension with gamma = 0 requires k = 0 (got k = {0})")]
    MeanZeroViolation(f64),

    #[error("inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
