use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid study window: require 0 < s < G, got s = {s}, G = {g}")]
    InvalidWindow { s: f64, g: f64 },

    #[error("invalid parameter domain: eps must lie in (0, 1), got {0}")]
    InvalidDomain(f64),

    #[error("rate parameter must be positive and finite, got {0}")]
    NonPositiveRate(f64),

    #[error("H_k is defined for k in {{1, 2, 3}}, got k = {0}")]
    InvalidOrder(u32),

    #[error("no observations with positive weight")]
    EmptySample,

    #[error("record {index} (y = {y}, l = {l}, r = {r}) lies outside the observable support")]
    OutsideSupport { index: usize, y: f64, l: u8, r: u8 },

    #[error("record {index} has invalid weight {weight}")]
    InvalidWeight { index: usize, weight: f64 },

    #[error("objective is not finite at theta = {theta}")]
    NonFiniteObjective { theta: f64 },

    #[error(
        "information sum is {denominator:e}; the second derivative of the criterion must be \
         strictly negative (non-singular) at the estimate"
    )]
    SingularInformation { denominator: f64 },

    #[error("per-cell sums are required for the standard error but were not supplied")]
    MissingCellSums,

    #[error("coverage level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("function evaluation is not finite at x = {x}")]
    NonFiniteEvaluation { x: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error:e})")]
    QuadratureNonConvergence { a: f64, b: f64, error: f64 },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid count table: {0}")]
    InvalidTable(String),

    #[error("cannot open {path}: {source}")]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
