use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which nonlinear transform a domain error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    Square,
    Log,
    Recip,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Square => "square",
            TransformKind::Log => "log",
            TransformKind::Recip => "reciprocal",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{kind} transform undefined for column {column} (value {value})")]
    TransformDomain {
        column: usize,
        kind: TransformKind,
        value: f64,
    },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported model file version {found} (expected {expected})")]
    UnsupportedVersion { found: String, expected: u32 },

    #[error("combinatorial budget exceeded: {0}")]
    Budget(String),

    #[error("repetition {rep}: {source}")]
    Repetition { rep: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver(_) => 3,
            Error::Repetition { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
