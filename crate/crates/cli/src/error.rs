use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),

    #[error("malformed CSV in {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("input has {got} data rows, at least {required} are needed")]
    TooFewRows { required: usize, got: usize },

    #[error(transparent)]
    Stat(#[from] rankdep::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rankdep::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Write(_) => 3,
            CliError::Csv { .. } | CliError::NonNumeric { .. } => 5,
            CliError::TooFewRows { .. } => 6,
            CliError::Stat(e) => match e {
                E::Undefined(_) | E::DegeneratePermutations { .. } | E::NotAPermutation { .. } => 4,
                E::NonFinite { .. }
                | E::LengthMismatch { .. }
                | E::RaggedRows { .. }
                | E::MagnitudeOverflow { .. } => 5,
                E::TooFewObservations { .. } => 6,
                E::EmptyDimension
                | E::Underpowered { .. }
                | E::TooFewReplications { .. }
                | E::InvalidConfig(_)
                | E::NegativeZ(_)
                | E::Unknown { .. }
                | E::Incompatible { .. } => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
