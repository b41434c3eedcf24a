use thiserror::Error;

/// Errors produced by the solver and control routines.
#[derive(Debug, Error)]
pub enum SloshError {
    #[error("argument {value} lies outside [-1, 1]")]
    Domain { value: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("weight is not admissible: {0}")]
    Admissibility(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("horizon {horizon} is below the observability threshold {threshold}")]
    BelowThreshold { horizon: f64, threshold: f64 },

    #[error("per-mode control system is ill-conditioned (condition number {condition:.3e}); try a larger horizon")]
    IllConditionedHorizon { condition: f64 },

    #[error("point {x} is within 1e-9 of the interval end points")]
    NearSingular { x: f64 },

    #[error("injection placement is unusable: {0}")]
    Placement(String),

    #[error("observability ratio is undefined for zero initial data")]
    UndefinedRatio,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SloshError {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            SloshError::Domain { .. } => "domain",
            SloshError::Input(_) => "input",
            SloshError::Admissibility(_) => "admissibility",
            SloshError::Resolution(_) => "resolution",
            SloshError::BelowThreshold { .. } => "observability_threshold",
            SloshError::IllConditionedHorizon { .. } => "ill_conditioned_horizon",
            SloshError::NearSingular { .. } => "near_singular",
            SloshError::Placement(_) => "placement",
            SloshError::UndefinedRatio => "undefined_ratio",
            SloshError::Io(_) => "io",
            SloshError::Json(_) => "json",
            SloshError::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, SloshError>;
