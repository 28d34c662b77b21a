use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The instance violates a shape or integer-budget rule. The message names the field.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("integer overflow in share comparison")]
    Overflow,

    /// An item worth more than a 1/n share to the divider reached the partition step.
    #[error("agent {agent} values item {item} above a 1/n share")]
    OversizedItem { agent: usize, item: usize },

    #[error("allocation is not a partition of the items: {0}")]
    NotAPartition(String),

    #[error("malformed decomposition: {0}")]
    MalformedDecomposition(String),

    /// An internal invariant broke. Seeing this means a solver bug, never a bad input.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("enumeration budget exceeded: {needed} assignments requested, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
}

impl Error {
    /// True for errors caused by malformed user input rather than solver state.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInstance(_) | Error::IndexOutOfRange(_) | Error::NotAPartition(_)
        )
    }
}
