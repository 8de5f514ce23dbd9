//! Wire-format parsers (JSON gateway payload, NEM12 CSV), mapping of source
//! point names to streams and model Points, and data-health analysis.
//!
//! Parsers are pure and reentrant; ingestion inherits the per-stream append
//! contract of the time-series store. Formats are selected explicitly by
//! the caller, never sniffed.

mod health;
mod nem12;
mod payload;

pub use health::{run_health_checks, HealthFinding, HealthKind, HealthPolicy, RangeBounds};
pub use nem12::{parse_nem12, Nem12Block, Nem12Day, Nem12Document};
pub use payload::{parse_dch_payload, serialize_dch_payload, DchPayload, SourcePoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::Iri;
use crate::timeseries::{TimeseriesError, TimeseriesStore};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("bad timestamp at {path}: {message}")]
    BadTimestamp { path: String, message: String },
    #[error("NEM12 line {line}: {message}")]
    Nem12 { line: usize, message: String },
    #[error("NEM12 line {line}: unsupported record type {record} (only 100/200/300/900 are accepted)")]
    UnsupportedRecord { line: usize, record: String },
    #[error("mapping rule references unknown stream `{0}`")]
    UnknownStreamInRule(String),
    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
}

impl IngestError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Maps a (gateway, source point name) pair onto a stream and optionally a
/// model Point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MappingRule {
    pub gateway: String,
    pub source_point_name: String,
    pub stream_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point: Option<Iri>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub ingested: usize,
    pub replaced: usize,
    /// Source point names with no applicable mapping rule. Never dropped
    /// silently.
    pub unmapped: Vec<String>,
}

/// Appends a payload's observations per the mapping rules. Every
/// observation is either ingested or its source point is listed as
/// unmapped.
pub fn map_and_ingest(
    store: &TimeseriesStore,
    payload: &DchPayload,
    rules: &[MappingRule],
) -> Result<IngestReport, IngestError> {
    for rule in rules {
        if !store.exists(&rule.stream_id) {
            return Err(IngestError::UnknownStreamInRule(rule.stream_id.clone()));
        }
    }
    let mut report = IngestReport::default();
    for point in &payload.points {
        let rule = rules.iter().find(|r| {
            r.gateway == payload.gateway && r.source_point_name == point.source_point_name
        });
        match rule {
            Some(rule) => {
                let appended = store.append(&rule.stream_id, &point.observations)?;
                report.ingested += appended.inserted;
                report.replaced += appended.replaced;
            }
            None => report.unmapped.push(point.source_point_name.clone()),
        }
    }
    Ok(report)
}
