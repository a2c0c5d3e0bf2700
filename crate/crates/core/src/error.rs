use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid cost model: {0}")]
    InvalidCost(String),

    #[error("queue {queue} cannot route a customer with pre-decision length 0")]
    InfeasibleAction { queue: usize },

    #[error("conditioning event has zero probability ({0})")]
    ZeroProbabilityEvent(String),

    #[error("belief shift would put mass below 0")]
    NegativeSupport,

    #[error("policy `{0}` does not declare a conditioning event for the common-information filter")]
    ConditioningUnavailable(String),

    #[error("enumeration size {size} exceeds budget {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("state cap {cap} below required {required}")]
    StateCapTooSmall { cap: u32, required: u32 },

    #[error("stationary solver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("chain is reducible: state {state} cannot reach 0")]
    Reducible { state: usize },

    #[error("expected cost does not settle at cap {cap} (tail contribution {tail:e})")]
    DivergingCost { cap: usize, tail: f64 },

    #[error("tail mass {tail:e} beyond cap {cap} exceeds bound {bound:e}")]
    TailMass { cap: usize, tail: f64, bound: f64 },

    #[error("invariant violated at replication {replication}, step {step}: {what}")]
    InvariantViolation {
        replication: u64,
        step: usize,
        what: String,
    },

    #[error("coupled dominance fails: {0}")]
    Dominance(String),

    #[error("replication {replication}, step {step}: {source}")]
    Replication {
        replication: u64,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
