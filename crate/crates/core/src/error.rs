//! Crate-wide error type.

use crate::sexpr::Position;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Position, msg: String },

    #[error("sort error for `{symbol}`: {msg}")]
    Sort { symbol: String, msg: String },

    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("fragment violation: {0}")]
    Fragment(String),

    #[error("resource bound exceeded: {0}")]
    Budget(String),

    #[error("ill-formed input: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn syntax(pos: Position, msg: impl Into<String>) -> Self {
        Error::Syntax { pos, msg: msg.into() }
    }

    pub fn sort(symbol: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Sort { symbol: symbol.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
