use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch { context: String, expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} outside allowed range {range} for {name}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },

    #[error("target {target:e} cannot be reached on the search interval (bound at the upper end is {at_upper:e})")]
    Unreachable { target: f64, at_upper: f64 },

    #[error("design failure: {0}")]
    DesignFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dimension(context: &str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { context: context.to_string(), expected, found }
    }

    pub(crate) fn check_probability(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
        if value.is_nan() || value < lo || value > hi {
            Err(Error::OutOfRange { name, value, range })
        } else {
            Ok(())
        }
    }
}
