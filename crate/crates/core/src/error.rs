use thiserror::Error;

/// Errors surfaced by the search library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("record {index} has non-positive confidence {confidence}")]
    NonPositiveConfidence { index: usize, confidence: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate zone: {0}")]
    DegenerateZone(String),

    #[error("point ({x}, {y}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("no candidate actions: zone contains no cell centers")]
    NoCandidates,

    #[error("cell index {index} outside grid of {cells} cells")]
    InvalidCell { index: usize, cells: usize },

    #[error("trajectory horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),

    #[error("time {t} outside trajectory horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },

    #[error("boundary conditions cannot satisfy kinematic limits: {0}")]
    Unreachable(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
