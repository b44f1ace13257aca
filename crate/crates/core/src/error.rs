use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("point {index} lies outside the window")]
    PointOutsideWindow { index: usize },

    #[error("points {first} and {second} have identical coordinates")]
    DuplicatePoint { first: usize, second: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index range must be positive and finite, got {0}")]
    InvalidRange(f64),

    #[error("query radius {radius} exceeds index build range {range}")]
    RadiusExceedsRange { radius: f64, range: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("cell side {side} does not tile the window (extent {extent})")]
    IndivisibleWindow { side: f64, extent: f64 },

    #[error("{variant} system is singular (condition number {condition:e})")]
    SingularSystem { variant: String, condition: f64 },

    #[error("need at least {needed} cells per axis for the covariance estimate, got {got}")]
    InsufficientCells { needed: usize, got: usize },

    #[error("pseudolikelihood fit diverged after {iterations} iterations (last iterate {last:?})")]
    Diverged { iterations: usize, last: Vec<f64> },

    #[error("data point {index} has infinite local energy; pseudolikelihood undefined")]
    InfeasibleData { index: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("malformed file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
