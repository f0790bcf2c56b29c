use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RpeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate counts at generation {generation}: x = M/2 and y = M/2")]
    Degenerate { generation: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, RpeError>;

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(RpeError::InvalidArgument(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}
