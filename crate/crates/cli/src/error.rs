use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error at `{path}`: {reason}")]
    Schema { path: String, reason: String },
}

impl CliError {
    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
