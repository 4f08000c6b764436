use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("invalid parameters: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("simulation aborted: {0}")]
    Deadlock(String),
    #[error("missing adder statistics for width {0}")]
    MissingWidth(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
