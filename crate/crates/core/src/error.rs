use thiserror::Error;

/// Errors raised by the library. Numeric precondition failures are kept
/// apart from argument errors so the CLI can map them to distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("variance required: {0}")]
    VarianceRequired(String),

    #[error("mean required: {0} has no finite mean")]
    MeanRequired(String),

    #[error("divergent moment: E|X - mu|^{order} is infinite for {family}")]
    DivergentMoment { family: String, order: f64 },

    #[error("deletion must leave at least one item (k = {k}, n = {n})")]
    DeletionTooLarge { k: usize, n: usize },

    #[error("state space too large for exact enumeration: {size} outcomes (limit {limit})")]
    StateSpaceOverflow { size: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of a numeric precondition (moments, mean, variance)
    /// as opposed to malformed arguments.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::VarianceRequired(_) | Error::MeanRequired(_) | Error::DivergentMoment { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
