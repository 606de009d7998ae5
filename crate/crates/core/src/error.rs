use thiserror::Error;

/// Errors raised by graph queries, valuations, solvers and file I/O.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (bad indices, unknown names, overlapping bundles).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exhaustive routine was asked to enumerate beyond its bound.
    #[error("capacity exceeded: {what} is {actual}, limit {limit}")]
    Capacity {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    /// A solver precondition does not hold on the given instance.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A solver that needs cancellable valuations was handed an explicit table.
    #[error("agent {agent} has a {kind} valuation, which this solver does not support")]
    UnsupportedValuation { agent: usize, kind: &'static str },

    /// No solver in the dispatch table applies to the instance.
    #[error("unsupported instance class: {0}")]
    UnsupportedClass(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
