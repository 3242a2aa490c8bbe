use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} is not invertible modulo {modulus}")]
    NotCoprime { value: i64, modulus: u64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty interval: lower endpoint {lo} is not below upper endpoint {hi}")]
    InvalidInterval { lo: String, hi: String },

    #[error("{what} needs {requested}, above the configured cap of {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("result does not fit in 64-bit integers")]
    Overflow,

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("histogram delta {histogram} does not match table delta {table}")]
    DeltaMismatch { histogram: String, table: String },

    #[error("cannot parse {input:?} as a rational number")]
    Parse { input: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
