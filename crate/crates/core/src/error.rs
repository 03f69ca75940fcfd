//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

use crate::panel::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    // --- input loading ---
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("duplicate indicator id `{id}` in {path}")]
    DuplicateIndicatorId { id: String, path: PathBuf },
    #[error("duplicate region id `{id}` in {path}")]
    DuplicateRegionId { id: String, path: PathBuf },
    #[error("duplicate value row for (year={year}, region={region}, indicator={indicator})")]
    DuplicateRow {
        year: i32,
        region: String,
        indicator: String,
    },
    #[error("values file references unknown region id `{id}` (line {line})")]
    UnknownRegionId { id: String, line: u64 },
    #[error("values file references unknown indicator id `{id}` (line {line})")]
    UnknownIndicatorId { id: String, line: u64 },
    #[error("non-finite value for (year={year}, region={region}, indicator={indicator})")]
    NonFiniteValue {
        year: i32,
        region: String,
        indicator: String,
    },
    #[error("missing value cell for (year={year}, region={region}, indicator={indicator})")]
    MissingCell {
        year: i32,
        region: String,
        indicator: String,
    },

    // --- entropy index ---
    #[error("subsystem {0} has no indicators")]
    EmptySubsystem(String),
    #[error("normalized column for indicator `{0}` sums to zero")]
    ZeroColumn(String),
    #[error("entropy is undefined for a single observation (years*regions = 1)")]
    DegenerateLog,
    #[error("all indicator columns are uninformative (zero total divergence)")]
    AllColumnsUninformative,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    // --- coupling ---
    #[error("coordination degree {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("macro region {0} has no member regions")]
    EmptyRegion(String),
    #[error("invalid coupling weights: alpha={alpha}, beta={beta} (need alpha+beta=1, both >= 0)")]
    InvalidCouplingWeights { alpha: f64, beta: f64 },

    // --- spatial statistics ---
    #[error("zero variance: all regional values are identical")]
    ZeroVariance,
    #[error("spatial weight matrix has zero total weight")]
    EmptyWeights,

    // --- ellipse geometry ---
    #[error("total point weight is zero")]
    ZeroTotalWeight,
    #[error("all points coincide; ellipse is undefined")]
    DegenerateCloud,
    #[error("duplicate year {0} in centroid series")]
    DuplicateYear(i32),

    // --- pipeline ---
    #[error("config error: {0}")]
    Config(String),
    #[error("input validation failed with {} error(s)", report.errors.len())]
    ValidationFailed { report: ValidationReport },
}

pub type Result<T> = std::result::Result<T, Error>;
