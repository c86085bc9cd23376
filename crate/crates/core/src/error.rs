//! Structured domain errors.

use serde_json::{json, Value};
use thiserror::Error;

/// Every domain failure carries a stable machine-readable code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridentError {
    #[error("incompatible conductors: {from} does not divide {to}")]
    IncompatibleConductors { from: u64, to: u64 },
    #[error("{k} is not coprime to the conductor {n}")]
    NotCoprime { k: i64, n: u64 },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("prime {p} is ramified (divides the conductor {conductor})")]
    RamifiedPrime { p: u64, conductor: u64 },
    #[error("triple {triple} is not hyperbolic")]
    NonHyperbolic { triple: String },
    #[error("inconsistent ramification: genus of {triple} with |G| = {order} is not an integer")]
    InconsistentRamification { triple: String, order: u64 },
    #[error("infinite order: the entry infinity is not supported here ({what})")]
    InfiniteOrder { what: String },
    #[error("prime {p} is inadmissible for {triple}: {reason}")]
    Inadmissible { triple: String, p: u64, reason: String },
    #[error("{what}: q = {q} exceeds the limit {limit}")]
    TooLarge { what: String, q: u64, limit: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl TridentError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::IncompatibleConductors { .. } => "incompatible_conductors",
            Self::NotCoprime { .. } => "not_coprime",
            Self::ZeroInverse => "zero_inverse",
            Self::RamifiedPrime { .. } => "ramified_prime",
            Self::NonHyperbolic { .. } => "non_hyperbolic",
            Self::InconsistentRamification { .. } => "inconsistent_ramification",
            Self::InfiniteOrder { .. } => "infinite_order",
            Self::Inadmissible { .. } => "inadmissible",
            Self::TooLarge { .. } => "too_large",
            Self::InvalidInput(_) => "invalid_input",
            Self::Hypothesis(_) => "hypothesis_violated",
            Self::Internal(_) => "internal",
        }
    }

    pub fn context(&self) -> Value {
        match self {
            Self::IncompatibleConductors { from, to } => json!({"from": from, "to": to}),
            Self::NotCoprime { k, n } => json!({"k": k, "n": n}),
            Self::RamifiedPrime { p, conductor } => json!({"p": p, "conductor": conductor}),
            Self::NonHyperbolic { triple } => json!({"triple": triple}),
            Self::InconsistentRamification { triple, order } => {
                json!({"triple": triple, "group_order": order})
            }
            Self::InfiniteOrder { what } => json!({"operation": what}),
            Self::Inadmissible { triple, p, reason } => {
                json!({"triple": triple, "p": p, "reason": reason})
            }
            Self::TooLarge { what, q, limit } => json!({"operation": what, "q": q, "limit": limit}),
            _ => json!({}),
        }
    }

    /// The `{code, message, context}` object written to stderr by the CLI.
    pub fn to_json(&self) -> Value {
        json!({"code": self.code(), "message": self.to_string(), "context": self.context()})
    }
}

pub type Result<T> = std::result::Result<T, TridentError>;
