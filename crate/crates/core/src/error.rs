use std::fmt;

use thiserror::Error;

use crate::circuit::Violation;

/// A syntax or semantic error in a text document, tied to its 1-based source
/// line (0 when the problem is not attributable to a single line).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("invalid circuit: {}", join_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("arity mismatch: gate acts on {expected} lines but {found} bits were given")]
    ArityMismatch { expected: usize, found: usize },

    #[error("gate is not diagonal")]
    NotDiagonal,

    #[error("expected a circuit of kind {expected}, found {found}")]
    WrongKind { expected: String, found: String },

    #[error("gate {0} is outside the universal set {{H, Z, CZ, P}}")]
    NotUniversal(usize),

    #[error("line {0} used after it was terminated into the post-selection register")]
    LineRetired(usize),

    #[error("{resource} cap exceeded: {requested} > {cap}")]
    CapExceeded { resource: &'static str, requested: usize, cap: usize },

    #[error("post-selection register has no weight on all-zeros (mass {mass:e})")]
    ZeroPostselectionMass { mass: f64 },

    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
