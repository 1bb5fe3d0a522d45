use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] modineq::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn invalid(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Invalid { path: path.into(), message: msg.into() }
    }

    /// 2 for anything the caller can fix by changing the input, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Invalid { .. } | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                modineq::Error::Convergence(_) => 3,
                _ => 2,
            },
            CliError::Csv(_) | CliError::Json(_) => 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::usage("x").exit_code(), 2);
        assert_eq!(CliError::invalid("f", "x").exit_code(), 2);
        assert_eq!(CliError::Core(modineq::Error::Input("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(modineq::Error::Convergence("x".into())).exit_code(), 3);
    }
}
