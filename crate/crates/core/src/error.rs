use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Every entry had zero weight, or no entries were given at all.
    #[error("degenerate distribution: support set is empty")]
    Degenerate,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("arity mismatch: expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("data vector {0} is not a member of the support set")]
    NotMember(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A configured cap (tuple count, width, permutations, oracle size) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
