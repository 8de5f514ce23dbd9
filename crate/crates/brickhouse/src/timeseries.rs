//! Append-oriented store of timestamped scalar observations per stream,
//! with metadata binding streams to model Points, window reads, bucket
//! aggregation, and completeness accounting.
//!
//! Appends are serialized per stream and atomic per batch; reads are
//! snapshot-consistent. All timestamps are UTC seconds. Qualitative
//! channels (statuses, alarms, commands) are stored as numeric codes whose
//! mapping lives with the stream's metadata; richer typed channels are
//! future work.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::Iri;

/// Latest representable timestamp (exclusive): 2100-01-01T00:00:00Z.
pub const MAX_TIMESTAMP: i64 = 4102444800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Actual,
    Substituted,
    Suspect,
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quality::Actual => "actual",
            Quality::Substituted => "substituted",
            Quality::Suspect => "suspect",
        })
    }
}

impl FromStr for Quality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "actual" => Ok(Quality::Actual),
            "substituted" => Ok(Quality::Substituted),
            "suspect" => Ok(Quality::Suspect),
            other => Err(format!("unknown quality `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "t")]
    pub timestamp: i64,
    #[serde(rename = "v")]
    pub value: f64,
    #[serde(rename = "q", default = "default_quality")]
    pub quality: Quality,
}

fn default_quality() -> Quality {
    Quality::Actual
}

impl Observation {
    pub fn new(timestamp: i64, value: f64) -> Self {
        Observation {
            timestamp,
            value,
            quality: Quality::Actual,
        }
    }
}

/// The quantity kinds known to the fixed unit table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantityKind {
    Energy,
    Power,
    Temperature,
    Humidity,
    Dimensionless,
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuantityKind::Energy => "Energy",
            QuantityKind::Power => "Power",
            QuantityKind::Temperature => "Temperature",
            QuantityKind::Humidity => "Humidity",
            QuantityKind::Dimensionless => "Dimensionless",
        })
    }
}

impl FromStr for QuantityKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Energy" => Ok(QuantityKind::Energy),
            "Power" => Ok(QuantityKind::Power),
            "Temperature" => Ok(QuantityKind::Temperature),
            "Humidity" => Ok(QuantityKind::Humidity),
            "Dimensionless" => Ok(QuantityKind::Dimensionless),
            other => Err(format!("unknown quantity kind `{other}`")),
        }
    }
}

/// Units accepted per quantity kind.
pub fn unit_valid(kind: QuantityKind, unit: &str) -> bool {
    match kind {
        QuantityKind::Energy => matches!(unit, "kWh" | "Wh" | "MWh" | "kvarh" | "kVAh"),
        QuantityKind::Power => matches!(unit, "kW" | "W" | "MW" | "kvar" | "kVA"),
        QuantityKind::Temperature => matches!(unit, "degC" | "°C" | "degF" | "K"),
        QuantityKind::Humidity => matches!(unit, "%"),
        QuantityKind::Dimensionless => true,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamMeta {
    pub stream_id: String,
    pub quantity_kind: QuantityKind,
    pub unit: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_point: Option<Iri>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expected_interval_seconds: Option<i64>,
    /// Site or building target the stream belongs to, for access control.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub owner_target: Option<String>,
}

/// Half-open time window `[start, end)` in UTC seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self, TimeseriesError> {
        if start >= end {
            return Err(TimeseriesError::BadWindow { start, end });
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, t: i64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn duration(&self) -> i64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendReport {
    pub inserted: usize,
    pub replaced: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFn {
    Sum,
    Mean,
    Min,
    Max,
    Count,
}

impl FromStr for AggregateFn {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(AggregateFn::Sum),
            "mean" => Ok(AggregateFn::Mean),
            "min" => Ok(AggregateFn::Min),
            "max" => Ok(AggregateFn::Max),
            "count" => Ok(AggregateFn::Count),
            other => Err(format!("unknown aggregate fn `{other}`")),
        }
    }
}

/// A bucket labeled by its start time (aligned to UTC epoch multiples).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub start: i64,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum TimeseriesError {
    #[error("stream `{0}` not found")]
    UnknownStream(String),
    #[error("stream `{0}` already exists")]
    DuplicateStream(String),
    #[error("unit `{unit}` is not valid for quantity kind {kind}")]
    UnitMismatch { kind: QuantityKind, unit: String },
    #[error("window start {start} must precede end {end}")]
    BadWindow { start: i64, end: i64 },
    #[error("observation value must be finite (got {0})")]
    NonFiniteValue(f64),
    #[error("timestamp {0} outside supported range")]
    TimestampOutOfRange(i64),
    #[error("bucket size must be positive")]
    BadBucket,
    #[error("expected interval must be positive")]
    BadInterval,
    #[error("persistence: {0}")]
    Io(String),
}

#[derive(Debug, Default, Clone)]
struct StreamData {
    observations: BTreeMap<i64, (f64, Quality)>,
}

struct StreamSlot {
    meta: StreamMeta,
    data: Arc<StreamData>,
}

/// The store. Streams are fully independent of each other.
#[derive(Default)]
pub struct TimeseriesStore {
    streams: RwLock<BTreeMap<String, StreamSlot>>,
}

impl TimeseriesStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_stream(&self, meta: StreamMeta) -> Result<(), TimeseriesError> {
        if !unit_valid(meta.quantity_kind, &meta.unit) {
            return Err(TimeseriesError::UnitMismatch {
                kind: meta.quantity_kind,
                unit: meta.unit,
            });
        }
        let mut streams = self.streams.write().unwrap();
        if streams.contains_key(&meta.stream_id) {
            return Err(TimeseriesError::DuplicateStream(meta.stream_id));
        }
        streams.insert(
            meta.stream_id.clone(),
            StreamSlot {
                meta,
                data: Arc::new(StreamData::default()),
            },
        );
        Ok(())
    }

    pub fn exists(&self, stream_id: &str) -> bool {
        self.streams.read().unwrap().contains_key(stream_id)
    }

    pub fn meta(&self, stream_id: &str) -> Option<StreamMeta> {
        self.streams
            .read()
            .unwrap()
            .get(stream_id)
            .map(|s| s.meta.clone())
    }

    pub fn stream_ids(&self) -> Vec<String> {
        self.streams.read().unwrap().keys().cloned().collect()
    }

    /// Appends a batch. Out-of-order timestamps are accepted and stored
    /// sorted; duplicate timestamps upsert (last write wins) and are counted
    /// as replaced. The batch is atomic: any invalid observation rejects the
    /// whole batch.
    pub fn append(
        &self,
        stream_id: &str,
        observations: &[Observation],
    ) -> Result<AppendReport, TimeseriesError> {
        for obs in observations {
            if !obs.value.is_finite() {
                return Err(TimeseriesError::NonFiniteValue(obs.value));
            }
            if obs.timestamp < 0 || obs.timestamp >= MAX_TIMESTAMP {
                return Err(TimeseriesError::TimestampOutOfRange(obs.timestamp));
            }
        }
        let mut streams = self.streams.write().unwrap();
        let slot = streams
            .get_mut(stream_id)
            .ok_or_else(|| TimeseriesError::UnknownStream(stream_id.to_string()))?;
        let mut data = (*slot.data).clone();
        let mut report = AppendReport::default();
        for obs in observations {
            match data
                .observations
                .insert(obs.timestamp, (obs.value, obs.quality))
            {
                Some(_) => report.replaced += 1,
                None => report.inserted += 1,
            }
        }
        slot.data = Arc::new(data);
        Ok(report)
    }

    /// Observations in `[window.start, window.end)`, ascending by timestamp.
    pub fn read_window(
        &self,
        stream_id: &str,
        window: Window,
    ) -> Result<Vec<Observation>, TimeseriesError> {
        let data = self.snapshot(stream_id)?;
        Ok(data
            .observations
            .range(window.start..window.end)
            .map(|(&t, &(v, q))| Observation {
                timestamp: t,
                value: v,
                quality: q,
            })
            .collect())
    }

    /// Bucketed aggregation. Buckets are aligned to UTC epoch multiples of
    /// `bucket_seconds`, labeled by start time; empty buckets are omitted.
    pub fn aggregate(
        &self,
        stream_id: &str,
        window: Window,
        bucket_seconds: i64,
        agg: AggregateFn,
    ) -> Result<Vec<Bucket>, TimeseriesError> {
        if bucket_seconds <= 0 {
            return Err(TimeseriesError::BadBucket);
        }
        let obs = self.read_window(stream_id, window)?;
        let mut grouped: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
        for o in obs {
            let start = o.timestamp - o.timestamp.rem_euclid(bucket_seconds);
            grouped.entry(start).or_default().push(o.value);
        }
        Ok(grouped
            .into_iter()
            .map(|(start, values)| {
                let value = match agg {
                    AggregateFn::Sum => values.iter().sum(),
                    AggregateFn::Mean => values.iter().sum::<f64>() / values.len() as f64,
                    AggregateFn::Min => values.iter().cloned().fold(f64::INFINITY, f64::min),
                    AggregateFn::Max => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    AggregateFn::Count => values.len() as f64,
                };
                Bucket { start, value }
            })
            .collect())
    }

    /// Fraction of expected observation slots in the window that are
    /// covered by at least one observation. Slots are counted from the
    /// window start; an observation covers the slot containing its
    /// timestamp.
    pub fn completeness(
        &self,
        stream_id: &str,
        window: Window,
        expected_interval_seconds: i64,
    ) -> Result<f64, TimeseriesError> {
        if expected_interval_seconds <= 0 {
            return Err(TimeseriesError::BadInterval);
        }
        let data = self.snapshot(stream_id)?;
        let slots = (window.duration() + expected_interval_seconds - 1) / expected_interval_seconds;
        if slots == 0 {
            return Ok(0.0);
        }
        let mut covered = std::collections::BTreeSet::new();
        for (&t, _) in data.observations.range(window.start..window.end) {
            covered.insert((t - window.start) / expected_interval_seconds);
        }
        Ok(covered.len() as f64 / slots as f64)
    }

    fn snapshot(&self, stream_id: &str) -> Result<Arc<StreamData>, TimeseriesError> {
        self.streams
            .read()
            .unwrap()
            .get(stream_id)
            .map(|s| s.data.clone())
            .ok_or_else(|| TimeseriesError::UnknownStream(stream_id.to_string()))
    }

    // -- persistence ----------------------------------------------------------

    /// Append-log line format: `timestamp<TAB>value<TAB>quality`.
    pub fn dump_log(&self, stream_id: &str) -> Result<String, TimeseriesError> {
        let data = self.snapshot(stream_id)?;
        let mut out = String::new();
        for (t, (v, q)) in &data.observations {
            out.push_str(&format!("{t}\t{v}\t{q}\n"));
        }
        Ok(out)
    }

    /// Replays an append-log. Later lines win on duplicate timestamps.
    pub fn load_log(&self, stream_id: &str, text: &str) -> Result<(), TimeseriesError> {
        let mut batch = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(t), Some(v), Some(q)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(TimeseriesError::Io(format!(
                    "log line {}: expected 3 fields",
                    idx + 1
                )));
            };
            batch.push(Observation {
                timestamp: t
                    .parse()
                    .map_err(|_| TimeseriesError::Io(format!("log line {}: bad timestamp", idx + 1)))?,
                value: v
                    .parse()
                    .map_err(|_| TimeseriesError::Io(format!("log line {}: bad value", idx + 1)))?,
                quality: q
                    .parse()
                    .map_err(|e| TimeseriesError::Io(format!("log line {}: {e}", idx + 1)))?,
            });
        }
        self.append(stream_id, &batch)?;
        Ok(())
    }
}
