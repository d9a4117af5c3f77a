use std::io;

use thiserror::Error;

use crate::qaplib::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("elite set has {have} solutions but minimum support is {theta}")]
    EliteTooSmall { have: usize, theta: u32 },

    #[error("pattern list is empty")]
    EmptyPatterns,

    #[error("pattern assigns conflicting pairs: {0}")]
    ConflictingPattern(String),

    #[error("could not collect {wanted} distinct elite solutions: {duplicates} consecutive duplicates after {have} members")]
    DuplicateSaturation {
        wanted: usize,
        have: usize,
        duplicates: usize,
    },

    #[error("best-known value must be positive, got {0}")]
    NonPositiveBkv(i64),

    #[error("seed collision for instance {instance} run {run}")]
    SeedCollision { instance: usize, run: usize },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
