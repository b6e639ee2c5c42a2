use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty metric space")]
    EmptySpace,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mismatched eps across reports: {0} vs {1}")]
    EpsMismatch(f64, f64),

    #[error("requires R > r (R = {big}, r = {small})")]
    RadiusOrder { big: f64, small: f64 },

    #[error("polydisk centers differ")]
    CenterMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient schedule: {usable} usable points, need at least 4")]
    InsufficientSchedule { usable: usize },

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("jet order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("pole of the rational family inside the box")]
    PoleInside,

    #[error("grid too coarse: need at least {required} points per axis, got {got}")]
    GridTooCoarse { required: usize, got: usize },

    #[error("linear program: {0}")]
    LinearProgram(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
