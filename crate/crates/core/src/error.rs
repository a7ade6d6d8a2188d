use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its invariant. `key` names the offending field.
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("fuzzy partition has no firing rule at input {input}")]
    DegeneratePartition { input: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
