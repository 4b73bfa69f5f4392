//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// CSV load failure with the offending 1-based line and column.
    #[error("csv error at line {line}, column {column}: {message}")]
    CsvLoad {
        line: u64,
        column: usize,
        message: String,
    },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("ambiguous attribute `{0}`; qualify it as table.attribute")]
    AmbiguousAttribute(String),

    #[error("position {position} out of range for table `{table}` with {rows} rows")]
    PositionOutOfRange {
        table: String,
        position: u64,
        rows: u64,
    },

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    /// Window or query specification rejected by validation, naming the rule.
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),

    #[error("invalid monoid: {0}")]
    InvalidMonoid(String),
}
