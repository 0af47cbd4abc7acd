use crate::formula::Var;
use thiserror::Error;

/// Location-tagged failure from one of the text readers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("variable {0} is not part of the formula")]
    Domain(Var),
    #[error("variable {0} is unbound")]
    Unbound(Var),
    #[error("tautological clause over variable {0}")]
    Tautology(Var),
    #[error("clause with {0} literals where at most 2 are allowed")]
    Arity(usize),
    #[error("class mismatch: {0}")]
    Class(String),
    #[error("invalid solver state: {0}")]
    State(String),
    #[error("equation index {0} out of range")]
    Index(usize),
    #[error("variable {0} does not occur in the pivot equation")]
    MissingVar(Var),
    #[error("cannot eliminate universal variable {0}")]
    Quantifier(Var),
    #[error("variable {0} is not innermost in its equation")]
    Innermost(Var),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("instance too large for exhaustive search: {size} exceeds cap {cap}")]
    Cap { size: usize, cap: usize },
    #[error("strategy tree does not match the prefix: {0}")]
    Shape(String),
    #[error("malformed graph: {0}")]
    Graph(String),
    #[error("invalid generator parameters: {0}")]
    Param(String),
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
