use thiserror::Error;

use crate::combinatorics::CriticalPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// The composed boundary has a nonzero entry at (row, column).
    #[error("not a chain complex: d∘d has entry {value} at ({row}, {column})")]
    NotAChainComplex {
        row: CriticalPoint,
        column: CriticalPoint,
        value: i64,
    },

    #[error("point outside target chart {0}")]
    PointOutsideChart(CriticalPoint),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
