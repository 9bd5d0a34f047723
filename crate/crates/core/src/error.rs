//! Crate error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// CSV structure or cell-level problems, with file/row/column context.
    #[error("csv error in {file}{}: {msg}", location_suffix(.row, .column))]
    Csv {
        file: String,
        row: Option<usize>,
        column: Option<String>,
        msg: String,
    },

    #[error("json error in {file}: {msg}")]
    Json { file: String, msg: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// Feature registry mismatches (unknown/missing/reordered feature names).
    #[error("feature registry error: {0}")]
    Registry(String),

    /// Model file problems: bad version tag, corrupt tree structure.
    #[error("model error: {0}")]
    Model(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn location_suffix(row: &Option<usize>, column: &Option<String>) -> String {
    match (*row, column) {
        (Some(r), Some(c)) => format!(" (row {r}, column `{c}`)"),
        (Some(r), None) => format!(" (row {r})"),
        (None, Some(c)) => format!(" (column `{c}`)"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn csv(file: impl Into<String>, row: Option<usize>, column: Option<&str>, msg: impl Into<String>) -> Self {
        Error::Csv {
            file: file.into(),
            row,
            column: column.map(|c| c.to_string()),
            msg: msg.into(),
        }
    }
}
