use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("conflicting samples: identical input with labels {a} and {b}")]
    ConflictingSamples { a: usize, b: usize },
    #[error("label {label} out of range (classes: {classes})")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid interval: [{lo}, {hi})")]
    InvalidInterval { lo: i128, hi: i128 },
    #[error("value {value} outside domain [{lo}, {hi})")]
    ValueOutOfDomain { value: i64, lo: i128, hi: i128 },
    #[error("training failed to reach target accuracy after all fallbacks (node over [{lo}, {hi}))")]
    TrainingFailure { lo: i128, hi: i128 },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("duplicate tuple id {0}")]
    DuplicateId(u64),
    #[error("unknown tuple id {0}")]
    UnknownId(u64),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("operation unsupported in encrypted mode: {0}")]
    UnsupportedSecure(&'static str),
    #[error("maintenance requires a single-segment memory unit")]
    MultiPartMaintenance,
    #[error("invalid file: {0}")]
    BadFile(String),
    #[error("checksum mismatch in section {0:?}")]
    ChecksumMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
