use std::path::PathBuf;

use thiserror::Error;

use crate::game::Inequality;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("payoff ordering violated: {0} does not hold")]
    OrderingViolation(Inequality),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Game(#[from] GameError),

    #[error("population needs at least 2 members, got {0}")]
    PopulationTooSmall(usize),

    #[error("wrong composition: {0}")]
    WrongComposition(&'static str),

    #[error("grid {width}x{height} is smaller than 3x3")]
    GridTooSmall { width: usize, height: usize },

    #[error("grid {width}x{height} cannot hold a ring block of side {block}")]
    GridTooSmallForRings {
        width: usize,
        height: usize,
        block: usize,
    },

    #[error("counts sum to {got}, expected {expected}")]
    CountMismatch { expected: usize, got: usize },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("batch is empty")]
    EmptyBatch,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("snapshot format error on line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
