use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("invalid input: {0}")]
    Domain(String),

    /// The request is well-formed but exceeds an enumeration or search budget.
    #[error("capability limit exceeded: {0}")]
    Capability(String),

    /// An analysis that depends on channel symmetry was requested for a
    /// channel that has no verified symmetry witness.
    #[error("channel is not symmetric: {0}")]
    NotSymmetric(String),

    /// A configuration file could not be parsed or is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A structural guarantee was observed to be violated at run time.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
