use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed record at line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("non-binary citation value {value:?} at line {line} (expected 0 or 1)")]
    NonBinary { line: u64, value: String },

    #[error("duplicate record for assessor {assessor:?}, product {product:?}, term {term:?}")]
    DuplicateTriple {
        assessor: String,
        product: String,
        term: String,
    },

    #[error("incomplete design: no record for assessor {assessor:?}, product {product:?}, term {term:?}")]
    IncompleteDesign {
        assessor: String,
        product: String,
        term: String,
    },

    #[error("invalid dimensions: {0}")]
    Dimensions(String),

    #[error("empty sample")]
    EmptySample,

    #[error("products must differ (got {0:?} twice)")]
    SameProduct(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank-deficient design: rank {rank} < {columns} columns")]
    RankDeficient { rank: usize, columns: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Broad failure category, mapped to the CLI exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    Config,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Malformed { .. }
            | Error::NonBinary { .. }
            | Error::DuplicateTriple { .. }
            | Error::IncompleteDesign { .. }
            | Error::Dimensions(_)
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Io(_) => ErrorKind::Data,
            Error::InvalidParameter(_) | Error::OutOfRange(_) | Error::SameProduct(_) => {
                ErrorKind::Config
            }
            Error::EmptySample
            | Error::RankDeficient { .. }
            | Error::DegenerateGeometry(_)
            | Error::Numerical(_) => ErrorKind::Numerical,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Data => 1,
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
        }
    }
}
