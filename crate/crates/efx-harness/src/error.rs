use thiserror::Error;

/// Errors raised while reading, writing, or running experiments.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] efx_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {got} (this build reads version {expected})")]
    UnsupportedVersion { got: u32, expected: u32 },
    #[error("header declares n = {expected} agents but values holds {got} rows (problem at row {row})")]
    RowCountMismatch { got: usize, expected: usize, row: usize },
    #[error("values row {row} has {got} entries but the header declares m = {expected}")]
    ColumnCountMismatch { row: usize, got: usize, expected: usize },
    #[error("scale must be at least 1")]
    ZeroScale,
    #[error("allocation references instance digest {in_file} but this instance digests to {computed}")]
    DigestMismatch { in_file: String, computed: String },
    #[error("owner list has {got} entries but the instance has {expected} goods")]
    OwnerLengthMismatch { got: usize, expected: usize },
    #[error("owner[{position}] = {got} is outside the 1-based agent range 1..={agents}")]
    OwnerOutOfRange { position: usize, got: usize, agents: usize },
    #[error("cannot summarize an empty record set")]
    NoRecords,
    #[error("invalid experiment config: {0}")]
    Config(String),
}
