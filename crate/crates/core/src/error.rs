use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sieve bound {requested} exceeds capacity {capacity}")]
    CapacityExceeded { requested: u64, capacity: u64 },

    #[error("{a} and {m} are not coprime")]
    NotCoprime { a: u64, m: u64 },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("pole of the zeta function at s = 1")]
    Pole,

    #[error("precision error: {0}")]
    Precision(String),

    #[error("non-integral coefficient {value} at n = {n}")]
    NonIntegralCoefficient { n: usize, value: String },

    #[error("admissibility violated: b*gamma = {product} >= 1/log(u) = {bound}")]
    Admissibility { product: f64, bound: f64 },

    #[error("construction aborted: {0}")]
    Construction(String),

    #[error("element is not of the form (l/q) N_k: {0}")]
    Decomposition(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("malformed record: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::NotCoprime { .. }
                | Error::NotPrime(_)
                | Error::Admissibility { .. }
                | Error::CapacityExceeded { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
