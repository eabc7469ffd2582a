use thiserror::Error;

/// Errors raised by group, cover, metric and norm computations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unsupported dimension {0} (must be 1..=4)")]
    UnsupportedDimension(usize),

    #[error("non-finite matrix or vector entry")]
    NonFinite,

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("invalid group spec at {pointer}: {message}")]
    InvalidSpec { pointer: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("group element carries no chart coordinates")]
    MissingCoords,

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cover construction failed: {message} (witness {witness:?})")]
    CoverConstruction { message: String, witness: Vec<f64> },

    #[error("point {0:?} is not contained in any cover element")]
    PointNotCovered(Vec<f64>),

    #[error("region disconnected or too tight for the grid budget: {0}")]
    RegionDisconnectedOrTooTight(String),

    #[error("partition coverage gap at frequency {0:?}")]
    CoverageGap(Vec<f64>),

    #[error("inadmissible analyzing window: Calderón sum vanishes at {0:?}")]
    InadmissibleWindow(Vec<f64>),

    #[error("quadrature truncation: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
