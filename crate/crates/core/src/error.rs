use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::statevector::MAX_QUBITS)]
    Size(usize),

    #[error("qubit index error: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("circuit needs {needed} qubits but backend `{backend}` has {available}")]
    WidthOverflow {
        needed: usize,
        available: usize,
        backend: String,
    },

    #[error("coupling graph of backend `{0}` is disconnected")]
    Disconnected(String),

    #[error("no feasible layout: {0}")]
    Layout(String),

    #[error("backend file line {line}: {message}")]
    BackendFile { line: usize, message: String },

    #[error("unsupported gate: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
