use thiserror::Error;

/// Errors raised while building or composing cells.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Two cells were composed along boundaries that do not agree.
    #[error("boundary mismatch: {0}")]
    Boundary(String),

    /// A value violates the invariants of its type.
    #[error("invalid construction: {0}")]
    Invalid(String),

    /// The instance does not provide an optional piece of structure.
    #[error("instance `{instance}` lacks the `{capability}` capability")]
    MissingCapability {
        instance: String,
        capability: &'static str,
    },

    /// A rectangular pasting diagram could not be evaluated.
    #[error("pasting error at row {row}, column {col}: {detail}")]
    Paste {
        row: usize,
        col: usize,
        detail: String,
    },

    /// A free construction did not stabilise within its bound.
    #[error("truncated free construction: {0}")]
    Truncated(String),

    /// An exhaustive search was asked to exceed its size limit.
    #[error("search bound exceeded: {0}")]
    Bound(String),

    /// Two squares cannot be compared, even up to coherence.
    #[error("incomparable squares: {0}")]
    Incomparable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn boundary(msg: impl Into<String>) -> Error {
    Error::Boundary(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
