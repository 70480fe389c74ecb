use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A text input (network, evidence, wcnf, suite) could not be parsed.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    /// An encoding was requested for a node whose relation it cannot encode.
    #[error("encoding {encoding} cannot be applied to {kind} node `{node}`")]
    PolicyMismatch {
        node: String,
        encoding: String,
        kind: &'static str,
    },

    /// The evidence has probability zero, so a conditional is undefined.
    #[error("evidence has probability zero")]
    ZeroEvidence,

    /// An enumeration or materialization would exceed its configured cap.
    #[error("{what} of size {size} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("invalid generator spec: {0}")]
    SpecInvalid(String),

    #[error("invalid network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidNetwork(Vec<Violation>),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("value {value} is outside the domain of node `{node}` (size {domain})")]
    ValueOutOfDomain {
        node: String,
        value: usize,
        domain: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            message: message.into(),
        }
    }
}
