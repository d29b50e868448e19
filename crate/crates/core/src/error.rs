//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("data stream exhausted at iteration {iteration}")]
    DataExhausted { iteration: u64 },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: u64 },

    #[error("non-finite bootstrap draw in replicate {replicate}")]
    NonFiniteDraw { replicate: usize },

    #[error("covariate magnitude {value} exceeds declared bound {bound}")]
    CovariateBound { value: f64, bound: f64 },

    #[error("interval endpoints crossed at coordinate {coord}: [{lower}, {upper}]")]
    CrossedInterval { coord: usize, lower: f64, upper: f64 },

    #[error("parallel composition requires the disjointness attestation for \"{0}\"")]
    NotDisjoint(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("malformed data row {row}: {message}")]
    MalformedRow { row: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad inputs or configuration, as opposed to
    /// failures discovered while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DimensionMismatch(_)
                | Error::NotDisjoint(_)
                | Error::Unsupported(_)
        )
    }

    /// True for numerical failures surfaced mid-computation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DataExhausted { .. }
                | Error::NonFiniteGradient { .. }
                | Error::NonFiniteDraw { .. }
                | Error::CovariateBound { .. }
                | Error::CrossedInterval { .. }
                | Error::MalformedRow { .. }
        )
    }
}
