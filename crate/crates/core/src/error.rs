use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition longer than mode count (length {length}, modes {modes})")]
    PartitionLongerThanModes { length: usize, modes: u64 },

    #[error("polarization count out of range (m = {m}, total = {total})")]
    PolarizationCountOutOfRange { m: i64, total: u32 },

    #[error("oracle size limit: total {total} exceeds {limit}")]
    OracleSizeLimit { total: u32, limit: u32 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("truncation cap exceeded: {cap} pairs leave tail mass {tail_bound:e}")]
    TruncationCapExceeded { cap: usize, tail_bound: f64 },

    #[error("zero yield for {pairs}-pair state")]
    ZeroYield { pairs: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
