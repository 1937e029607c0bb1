use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // numerics
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("invalid data matrix: {0}")]
    InvalidMatrix(String),

    // pca
    #[error("all eigenvalues are zero")]
    AllZero,
    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),
    #[error("accumulated contribution never reaches threshold {0}")]
    ThresholdUnreachable(f64),
    #[error("unknown reduction mode `{0}`")]
    UnknownReduction(String),

    // bpnn
    #[error("training set is empty")]
    EmptyDataset,
    #[error("label {value} at sample {sample} is outside (0, 1)")]
    LabelOutOfRange { sample: usize, value: f64 },
    #[error("invalid network configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed model file at line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },

    // rs-index
    #[error("network output {0} is not positive")]
    NonPositiveOutput(f64),
    #[error("degenerate label range [{min}, {max}]")]
    DegenerateRange { min: f64, max: f64 },
    #[error("label {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    // forecast
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("years must be strictly increasing and non-constant")]
    DegenerateYears,

    // ingest / pipeline
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("parse error at row {row}, column `{column}`: {value:?}")]
    ParseError { row: usize, column: String, value: String },
    #[error("value {value} out of range at row {row}, column `{column}`")]
    RangeViolation { row: usize, column: String, value: f64 },
    #[error("duplicate record for ({country}, {year})")]
    DuplicateKey { country: String, year: i32 },
    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },
    #[error("model file not found: {0}")]
    ModelMissing(PathBuf),
    #[error("country `{country}` has {got} RS values, need at least {needed}")]
    InsufficientHistory { country: String, got: usize, needed: usize },
    #[error("config error at line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

/// Process exit status classes used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Validation = 1,
    Numeric = 2,
    Io = 3,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::NoConvergence { .. } | Error::NotSymmetric(_) | Error::AllZero => {
                ExitClass::Numeric
            }
            Error::Io { .. } | Error::ModelMissing(_) => ExitClass::Io,
            Error::Csv(e) if e.is_io_error() => ExitClass::Io,
            _ => ExitClass::Validation,
        }
    }
}
