use thiserror::Error;

/// Errors raised by parameter validation, estimation and figure statistics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} = {value} is outside the open interval (0, 1)")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("proxy carries no information: {field} is equal at both levels ({value})")]
    DegenerateProxy { field: &'static str, value: f64 },

    #[error("outcome mean mu[{a}][{c}] = {value} is not a Bernoulli mean in [0, 1]")]
    MuOutOfRange { a: usize, c: usize, value: f64 },

    #[error("empty strata (a, d): {0:?}")]
    EmptyStratum(Vec<(u8, u8)>),

    #[error("no rows to ingest")]
    EmptyData,

    #[error("no qualifying records")]
    EmptyInput,

    #[error("row {row}: {message}")]
    InvalidRow { row: u64, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DegenerateProxy { .. } => "DegenerateProxy",
            Error::MuOutOfRange { .. } => "MuOutOfRange",
            Error::EmptyStratum(_) => "EmptyStratum",
            Error::EmptyData => "EmptyData",
            Error::EmptyInput => "EmptyInput",
            Error::InvalidRow { .. } => "InvalidRow",
            Error::Csv(_) => "Csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
