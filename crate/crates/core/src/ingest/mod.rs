//! Reading fleet and catalog files, and auditing fleet data quality.

mod audit;
mod catalog_file;
mod fleet;

use std::path::Path;

use thiserror::Error;

use crate::model::PopulationClass;

pub use audit::{audit_fleet, AuditCounts, BayAudit, QualityAudit, SubstationAudit};
pub use catalog_file::{parse_catalogs, parse_catalogs_str};
pub use fleet::{
    fleet_to_string, parse_fleet, read_fleet, write_fleet, FLEET_HEADER, MAX_BUILD_YEAR,
    MIN_BUILD_YEAR,
};

/// Hard ingest failures. Each names the file and, where it has one, the line.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:1: header must be `{}`, found `{found}`", fleet::FLEET_HEADER.join(","))]
    MissingHeader { file: String, found: String },
    #[error("{file}:{line}: duplicate asset_id `{asset_id}` (first seen on line {first_line})")]
    DuplicateAssetId {
        file: String,
        line: u64,
        asset_id: String,
        first_line: u64,
    },
    #[error("{file}:{line}: hi_score {value} outside 0..=10")]
    HiOutOfRange { file: String, line: u64, value: i64 },
    #[error("{file}:{line}: malformed row: {reason}")]
    MalformedRow {
        file: String,
        line: u64,
        reason: String,
    },
    #[error("{file}:{line}: severity for `{asset_type}` must be a positive integer, got {value}")]
    NegativeSeverity {
        file: String,
        line: u64,
        asset_type: String,
        value: i64,
    },
    #[error("{file}:{line}: weight {weight} for `{asset_type}` outside the {class} range")]
    WeightOutOfClassRange {
        file: String,
        line: u64,
        asset_type: String,
        class: PopulationClass,
        weight: f64,
    },
    #[error("{file}:{line}: unknown population class `{class}` for `{asset_type}`")]
    UnknownClass {
        file: String,
        line: u64,
        asset_type: String,
        class: String,
    },
    #[error("{file}:{line}: {message}")]
    CatalogSyntax {
        file: String,
        line: u64,
        message: String,
    },
    #[error("write failed: {0}")]
    Write(String),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            file: path.display().to_string(),
            source,
        }
    }

    /// Line the error points at, if any.
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::MissingHeader { .. } => Some(1),
            IngestError::DuplicateAssetId { line, .. }
            | IngestError::HiOutOfRange { line, .. }
            | IngestError::MalformedRow { line, .. }
            | IngestError::NegativeSeverity { line, .. }
            | IngestError::WeightOutOfClassRange { line, .. }
            | IngestError::UnknownClass { line, .. }
            | IngestError::CatalogSyntax { line, .. } => Some(*line),
            IngestError::Io { .. } | IngestError::Write(_) => None,
        }
    }
}
