use thiserror::Error;

use crate::padic::Valuation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("precision must be at least {min}, got {got}")]
    InvalidPrecision { min: u32, got: u32 },

    #[error("mismatched primes {0} and {1}")]
    PrimeMismatch(u64, u64),

    /// An operand with precision 0 was consumed.
    #[error("operand carries no p-adic digits (precision 0)")]
    PrecisionExhausted,

    #[error("insufficient precision for {context}: need {needed} digits, have {available}")]
    InsufficientPrecision {
        context: &'static str,
        needed: u32,
        available: u32,
    },

    /// A coefficient of `P - P^p` had valuation 0, so the seed was not of
    /// the admissible shape `a + p^n u` with enough levels.
    #[error("coefficient of degree {degree} of P - P^p is not divisible by p")]
    NotDivisible { degree: usize },

    #[error("value is not a unit (valuation {0})")]
    NotUnit(Valuation),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed data: {0}")]
    Malformed(String),

    /// A mathematical invariant failed. Never produced for valid inputs.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for the errors caused by running out of p-adic digits.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::InvalidPrecision { .. }
                | Error::PrecisionExhausted
                | Error::InsufficientPrecision { .. }
        )
    }

    pub(crate) fn insufficient(context: &'static str, needed: u32, available: u32) -> Self {
        Error::InsufficientPrecision {
            context,
            needed,
            available,
        }
    }
}
