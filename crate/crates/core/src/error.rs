use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("window mismatch: expected {expected}, found {found}")]
    WindowMismatch { expected: usize, found: usize },
    #[error("no contributing states")]
    NoContributingStates,
    #[error("no samples")]
    NoSamples,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("non-finite cost entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },
    #[error("invalid existence assignment")]
    InvalidExistenceAssignment,
    #[error("invalid insertion vector: entry {index} is {value}, allowed range is 0..={index}")]
    InvalidInsertionVector { index: usize, value: usize },
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
