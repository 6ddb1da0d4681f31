use thiserror::Error;

/// Errors produced by the selection, scheduling and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid requirement: minimum must be positive, got {0}")]
    InvalidRequirement(f64),

    #[error("cannot normalize: every ratio is zero")]
    DegenerateNormalization,

    #[error("invalid histogram: {0}")]
    InvalidHistogram(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("similarity undefined for a zero vector")]
    UndefinedSimilarity,

    #[error("no participation recorded")]
    NoParticipation,

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mkp instance has {items} items, brute force supports at most {max}")]
    TooManyItems { items: usize, max: usize },

    #[error("unknown item id {0}")]
    UnknownItem(String),

    #[error("empty client pool")]
    EmptyPool,

    #[error("trainer failure: {0}")]
    Trainer(String),

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
