use thiserror::Error;

use crate::extreal::ExtReal;
use crate::vector::Vector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0} is outside the effective domain")]
    OutsideDomain(Vector),

    #[error("invalid liminf scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("function `{0}` has no exact subdifferential oracle")]
    MissingExactOracle(String),

    #[error("no mean value witness found; best candidate {best} with subderivative {value}")]
    NoWitness { best: Vector, value: ExtReal },

    #[error("graph sample has no points inside the probe region")]
    UnusableSample,

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("malformed graph table: {0}")]
    MalformedTable(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
