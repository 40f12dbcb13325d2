use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Usage { field: String, message: String },
    #[error(transparent)]
    Core(#[from] fragmenta::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: column {index} is `{found}`, expected `{expected}`")]
    Schema {
        path: PathBuf,
        index: usize,
        found: String,
        expected: String,
    },
    #[error("{path}: row {row}, column `{column}`: `{value}` is not a number")]
    Value {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{0}: empty plot, the CSV has no data rows")]
    EmptyPlot(PathBuf),
    #[error("{0} acceptance check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn usage(field: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 1 for failed checks and runtime failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. }
            | CliError::Json { .. }
            | CliError::Schema { .. }
            | CliError::Value { .. }
            | CliError::EmptyPlot(_) => 2,
            CliError::Core(
                fragmenta::Error::InvalidParameter { .. }
                | fragmenta::Error::Unsupported { .. }
                | fragmenta::Error::Domain { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
