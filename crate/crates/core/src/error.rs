use thiserror::Error;

/// Errors raised by the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("arity {n} outside supported range {min}..={max}")]
    Arity { n: u32, min: u32, max: u32 },

    /// Conditioning on a value of the function that it never takes.
    #[error("the function never outputs {0}")]
    EmptyPreimage(u8),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("root not bracketed: f({lo}) and f({hi}) have the same sign")]
    Bracket { lo: f64, hi: f64 },

    #[error("quadrature did not converge after {0} subdivisions")]
    NonConvergence(usize),

    /// The requested quantity has no exact rational value.
    #[error("not representable as an exact rational: {0}")]
    NotRational(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
