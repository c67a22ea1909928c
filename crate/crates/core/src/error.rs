use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("negative intensity {value} at sample {index}")]
    NegativeIntensity { index: usize, value: f64 },

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("CFL condition violated: ratio {ratio} > 1")]
    CflViolation { ratio: f64 },

    #[error("interval [{z0}, {z1}] m lies outside the dispersion map [0, {l_max}] m")]
    OutsideMap { z0: f64, z1: f64, l_max: f64 },

    #[error("invalid dispersion map: {0}")]
    InvalidMap(String),

    #[error("grids are not nested: {0}")]
    NotNested(String),

    #[error("convergence ladder needs at least 3 rungs with positive errors, got {0}")]
    TooFewRungs(usize),

    #[error("invalid convergence ladder: {0}")]
    InvalidLadder(String),

    #[error("centroid of a zero field is undefined")]
    ZeroField,

    #[error("config error: {0}")]
    Config(String),

    #[error("unit error in `{field}`: {reason}")]
    Unit { field: String, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
