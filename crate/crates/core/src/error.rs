use thiserror::Error;

use crate::codec::rans::RansError;
use crate::params::ConstantsError;
use crate::workspace::ArenaError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Rans(#[from] RansError),
    #[error("iteration cap of {0} reached")]
    IterationCap(u32),
    #[error("invalid {what} length: expected {expected} bytes, got {actual}")]
    Length {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("malformed {0}")]
    Malformed(&'static str),
    #[error("{0}")]
    Usage(String),
}
