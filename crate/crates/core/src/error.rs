use std::fmt;

use thiserror::Error;

/// A line/column position in a source file (both 1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: {msg}")]
    Type { pos: Pos, msg: String },
    #[error("{0}")]
    Resolve(String),
    #[error("normalization: {0}")]
    Normalize(String),
    #[error("atom: {0}")]
    Atom(String),
    #[error("smt: {0}")]
    Smt(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    pub fn ty(pos: Pos, msg: impl Into<String>) -> Self {
        Error::Type { pos, msg: msg.into() }
    }

    /// Renders the error in `file:line:col: message` form when it carries a position.
    pub fn with_file(&self, file: &str) -> String {
        match self {
            Error::Syntax { pos, msg } => format!("{file}:{pos}: syntax error: {msg}"),
            Error::Type { pos, msg } => format!("{file}:{pos}: {msg}"),
            other => format!("{file}: {other}"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
