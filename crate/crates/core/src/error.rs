//! Error type shared by all modules.

use thiserror::Error;

/// Validation and runtime failures. Each variant carries a stable
/// machine-readable code (see [`Error::code`]) used by the CLI.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid-interval: interval bounds must satisfy a <= b (got a={a}, b={b})")]
    InvalidInterval { a: f64, b: f64 },

    #[error("infinite-moment: kernel declares an unbounded first moment")]
    InfiniteMoment,

    #[error("kernel-table: line {line}: {reason}")]
    KernelTable { line: usize, reason: String },

    #[error("out-of-range:{field}: {value} not in {expected}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("degenerate-kernel: unnormalized weight total is zero")]
    DegenerateKernel,

    #[error(
        "cfl-violation: lambda={lambda} exceeds max ratio {max_ratio} for \
         {velocity} under the {variant} condition"
    )]
    CflViolation {
        lambda: f64,
        max_ratio: f64,
        velocity: String,
        variant: String,
    },

    #[error("grid-indivisible: (x_max - x_min)/h = {ratio} is not an integer")]
    GridIndivisible { ratio: f64 },

    #[error("grid-incompatible: weights built for h={weights_h} but grid has h={grid_h}")]
    GridIncompatible { weights_h: f64, grid_h: f64 },

    #[error("data-out-of-range: cell average {value} at cell {cell} outside [0,1]")]
    DataOutOfRange { cell: usize, value: f64 },

    #[error("empty-window: diagnostic window contains no cells")]
    EmptyWindow,

    #[error("nonpositive-error: rate fit needs positive (h, error) pairs (got {value})")]
    NonpositiveError { value: f64 },

    #[error("insufficient-points: rate fit needs at least 2 points")]
    InsufficientPoints,

    #[error("invalid-spec:{field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
}

impl Error {
    /// Stable one-token code for machine-parsable CLI errors.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInterval { .. } => "invalid-interval",
            Error::InfiniteMoment => "infinite-moment",
            Error::KernelTable { .. } => "kernel-table",
            Error::OutOfRange { .. } => "out-of-range",
            Error::DegenerateKernel => "degenerate-kernel",
            Error::CflViolation { .. } => "cfl-violation",
            Error::GridIndivisible { .. } => "grid-indivisible",
            Error::GridIncompatible { .. } => "grid-incompatible",
            Error::DataOutOfRange { .. } => "data-out-of-range",
            Error::EmptyWindow => "empty-window",
            Error::NonpositiveError { .. } => "nonpositive-error",
            Error::InsufficientPoints => "insufficient-points",
            Error::InvalidSpec { .. } => "invalid-spec",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
