use thiserror::Error;

/// Errors raised across the planning toolchain.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("infeasible firing: place {place} would hold {tokens} tokens")]
    InfeasibleFiring { place: String, tokens: i64 },
    #[error("reachability oracle exceeded node cap of {cap} markings")]
    OracleOverflow { cap: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("solution file rejected: {0}")]
    SolutionImport(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
