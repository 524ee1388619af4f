use std::fmt;

use thiserror::Error;

use crate::tree::{NodeId, Statement, ValidationReport};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbError {
    #[error("malformed probability {0:?}")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("probability {0:?} outside [0, 1]")]
    OutOfRange(String),
}

/// A syntax error in an event or query string. `position` is a byte offset
/// into the input and never exceeds its length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at position {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Prob(#[from] ProbError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("{statement} cannot be resolved: leaf {leaf} reached without binding {}", statement.variable)]
    Unresolvable { statement: Statement, leaf: NodeId },

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("{0} on logically false event (empty true set)")]
    LogicallyFalse(&'static str),

    #[error("event unreachable below {}", .0.map_or_else(|| "this node".to_string(), |n| format!("node {n}")))]
    Unreachable(Option<NodeId>),

    #[error("topology mismatch at node {node}: {detail}")]
    TopologyMismatch { node: NodeId, detail: String },

    #[error("oracle undefined: {0}")]
    OracleUndefined(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("invalid tree:\n{0}")]
    Invalid(ValidationReport),
}

impl Error {
    /// True for problems with the input (syntax, schema, validation) as
    /// opposed to failures while evaluating a well-formed request.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Prob(_) | Error::Parse(_) | Error::Json(_) | Error::Schema(_) | Error::Invalid(_)
        )
    }
}
