use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("sum of elements overflows 63-bit arithmetic")]
    SumOverflow,

    #[error("sum set over [1, {total}] exceeds the dense bitmap limit of {limit}")]
    SumSetTooLarge { total: u64, limit: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} outside the coloring range [1, {n}]")]
    OutOfRange { value: u64, n: u64 },

    #[error("sum-distinct pruning requires a doubling coloring, got {0}")]
    PruneNeedsDoubling(String),

    #[error("exact evaluation supports k <= {max}, got k = {k}; use the log2 form instead")]
    PrecisionLimit { k: u32, max: u32 },

    #[error("{0}")]
    BeyondDeskScale(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
