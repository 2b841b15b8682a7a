use thiserror::Error;

/// Errors produced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient neighborhood: series has {len} ticks, cleaning needs at least {need}")]
    InsufficientNeighborhood { len: usize, need: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("undefined pattern slot: intraday minute {minute} has no finite returns in any day")]
    UndefinedPatternSlot { minute: usize },

    #[error("event times must be strictly increasing and inside the sample")]
    BadEventTimes,

    #[error("jump direction disagreement at minute {minute}")]
    DirectionMismatch { minute: u32 },

    #[error("non-stationary Hawkes model: spectral radius {rho:.4} >= 1")]
    NonStationary { rho: f64 },

    #[error("no coupling identifiable: zero observed cojumps")]
    NoCoupling,

    #[error("split check failed: {count} returns exceed the bound (first at index {first})")]
    SplitDetected { count: usize, first: usize },

    #[error("malformed CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
