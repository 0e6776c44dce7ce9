use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    Construction(String),

    #[error("graph is disconnected: vertex {0} is unreachable")]
    Disconnected(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("method `{method}` does not apply to this graph: {reason}")]
    MethodMismatch { method: String, reason: String },

    #[error("oracle budget exceeded after {0} states")]
    OracleBudget(usize),

    #[error("enumeration of {size} elements exceeds the cap of {cap}")]
    EnumerationCap { size: u128, cap: u64 },

    #[error("monte carlo budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("requested accuracy unattainable: {0}")]
    Accuracy(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
