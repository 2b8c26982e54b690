use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("conductor {sub} does not divide {conductor}")]
    BadConductor { sub: u64, conductor: u64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Raised for even exponents; only odd order is supported.
    #[error("unsupported: {0} (the even-order case is open; only odd exponents are handled)")]
    EvenOrder(String),

    #[error(
        "enumeration budget exceeded: {what} has size {size}, budget is {budget}; \
         pass an explicit budget override to proceed"
    )]
    Budget {
        what: String,
        size: u64,
        budget: u64,
    },

    #[error("axioms do not pin system: {0}")]
    Underdetermined(String),

    #[error("inconsistent constraint: {0}")]
    Inconsistent(String),

    #[error("internal defect: {0}")]
    Defect(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
