use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Exhaustive routine asked to run above its enumeration cap.
    #[error("size {size} exceeds the exhaustive cap of {cap}; {hint}")]
    TooLarge {
        size: usize,
        cap: usize,
        hint: &'static str,
    },

    #[error("tree structure: {0}")]
    Structure(String),

    /// Operation requires a binary tree.
    #[error("tree shape: {0}")]
    Shape(String),

    #[error("solver failed on a subgraph of {size} vertices: {msg}")]
    Solver { size: usize, msg: String },

    #[error("stream: {0}")]
    Stream(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
