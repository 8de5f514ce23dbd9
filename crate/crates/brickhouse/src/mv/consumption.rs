//! Net energy consumption from a signed meter expression: per-bucket sums
//! of each term's energy, with per-term completeness gating. Power channels
//! are integrated to energy at read time by the trapezoidal rule.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rdf::Iri;
use crate::timeseries::{Observation, QuantityKind, StreamMeta, TimeseriesStore, Window};

use super::MvError;

/// Read access to streams, satisfied by the store directly or by a sandbox
/// handle scoped to an installation's bound streams.
pub trait StreamReader {
    fn meta(&self, stream_id: &str) -> Result<StreamMeta, MvError>;
    fn read(&self, stream_id: &str, window: Window) -> Result<Vec<Observation>, MvError>;
}

impl StreamReader for TimeseriesStore {
    fn meta(&self, stream_id: &str) -> Result<StreamMeta, MvError> {
        TimeseriesStore::meta(self, stream_id).ok_or_else(|| {
            MvError::Timeseries(crate::timeseries::TimeseriesError::UnknownStream(
                stream_id.to_string(),
            ))
        })
    }

    fn read(&self, stream_id: &str, window: Window) -> Result<Vec<Observation>, MvError> {
        Ok(self.read_window(stream_id, window)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Energy,
    Power,
}

/// The data channel selected for one meter: a single stream, or all three
/// phase streams summed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSelection {
    pub kind: ChannelKind,
    pub points: Vec<Iri>,
    pub streams: Vec<String>,
    pub sense: String,
    pub phase_sum: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeterTerm {
    pub sign: Sign,
    pub meter: Iri,
    pub selection: PointSelection,
}

/// A signed combination of meter channels representing net consumption.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeterExpression {
    pub terms: Vec<MeterTerm>,
}

impl MeterExpression {
    /// Every stream id the expression reads.
    pub fn stream_ids(&self) -> Vec<String> {
        self.terms
            .iter()
            .flat_map(|t| t.selection.streams.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBucket {
    pub start: i64,
    pub value_kwh: f64,
    /// All terms met the completeness threshold in this bucket.
    pub complete: bool,
    /// Worst per-term coverage in this bucket.
    pub min_coverage: f64,
}

fn energy_factor_to_kwh(meta: &StreamMeta, stream: &str) -> Result<f64, MvError> {
    match (meta.quantity_kind, meta.unit.as_str()) {
        (QuantityKind::Energy, "kWh") => Ok(1.0),
        (QuantityKind::Energy, "Wh") => Ok(0.001),
        (QuantityKind::Energy, "MWh") => Ok(1000.0),
        (kind, unit) => Err(MvError::UnitMismatch {
            stream: stream.to_string(),
            detail: format!("expected real energy, got {kind} in `{unit}`"),
        }),
    }
}

fn power_factor_to_kw(meta: &StreamMeta, stream: &str) -> Result<f64, MvError> {
    match (meta.quantity_kind, meta.unit.as_str()) {
        (QuantityKind::Power, "kW") => Ok(1.0),
        (QuantityKind::Power, "W") => Ok(0.001),
        (QuantityKind::Power, "MW") => Ok(1000.0),
        (kind, unit) => Err(MvError::UnitMismatch {
            stream: stream.to_string(),
            detail: format!("expected real power, got {kind} in `{unit}`"),
        }),
    }
}

fn bucket_of(t: i64, bucket_seconds: i64) -> i64 {
    t - t.rem_euclid(bucket_seconds)
}

/// Per-bucket kWh for one energy stream: sum of interval readings.
fn energy_buckets(
    reader: &dyn StreamReader,
    stream: &str,
    window: Window,
    bucket_seconds: i64,
) -> Result<BTreeMap<i64, f64>, MvError> {
    let meta = reader.meta(stream)?;
    let factor = energy_factor_to_kwh(&meta, stream)?;
    let mut out = BTreeMap::new();
    for o in reader.read(stream, window)? {
        *out.entry(bucket_of(o.timestamp, bucket_seconds)).or_insert(0.0) += o.value * factor;
    }
    Ok(out)
}

/// Per-bucket kWh for a power stream: trapezoidal integration of kW over
/// time, with segments clipped at bucket boundaries.
fn power_buckets(
    reader: &dyn StreamReader,
    stream: &str,
    window: Window,
    bucket_seconds: i64,
) -> Result<BTreeMap<i64, f64>, MvError> {
    let meta = reader.meta(stream)?;
    let factor = power_factor_to_kw(&meta, stream)?;
    let obs = reader.read(stream, window)?;
    let mut out = BTreeMap::new();
    for pair in obs.windows(2) {
        let (t1, v1) = (pair[0].timestamp, pair[0].value * factor);
        let (t2, v2) = (pair[1].timestamp, pair[1].value * factor);
        if t2 <= t1 {
            continue;
        }
        let value_at = |t: i64| -> f64 {
            v1 + (v2 - v1) * (t - t1) as f64 / (t2 - t1) as f64
        };
        let mut seg_start = t1;
        while seg_start < t2 {
            let bucket = bucket_of(seg_start, bucket_seconds);
            let seg_end = (bucket + bucket_seconds).min(t2);
            let (va, vb) = (value_at(seg_start), value_at(seg_end));
            let hours = (seg_end - seg_start) as f64 / 3600.0;
            *out.entry(bucket).or_insert(0.0) += hours * (va + vb) / 2.0;
            seg_start = seg_end;
        }
    }
    Ok(out)
}

/// Coverage fraction per bucket, from the stream's expected interval. A
/// stream with no declared interval counts a bucket as covered when it has
/// any observation.
fn coverage_buckets(
    reader: &dyn StreamReader,
    stream: &str,
    window: Window,
    bucket_seconds: i64,
) -> Result<BTreeMap<i64, f64>, MvError> {
    let meta = reader.meta(stream)?;
    let obs = reader.read(stream, window)?;
    let mut out = BTreeMap::new();
    match meta.expected_interval_seconds {
        Some(interval) if interval > 0 => {
            let slots_per_bucket = ((bucket_seconds + interval - 1) / interval).max(1);
            let mut covered: BTreeMap<i64, std::collections::BTreeSet<i64>> = BTreeMap::new();
            for o in &obs {
                let bucket = bucket_of(o.timestamp, bucket_seconds);
                covered
                    .entry(bucket)
                    .or_default()
                    .insert((o.timestamp - bucket) / interval);
            }
            for (bucket, slots) in covered {
                out.insert(bucket, slots.len() as f64 / slots_per_bucket as f64);
            }
        }
        _ => {
            for o in &obs {
                out.insert(bucket_of(o.timestamp, bucket_seconds), 1.0);
            }
        }
    }
    Ok(out)
}

/// Evaluates the expression per bucket: `Σ sign · energy(term)`. Buckets
/// where any term's coverage falls below the threshold are marked
/// incomplete so downstream stages exclude them.
pub fn compute_net_consumption(
    reader: &dyn StreamReader,
    expression: &MeterExpression,
    window: Window,
    bucket_seconds: i64,
    completeness_threshold: f64,
) -> Result<Vec<EnergyBucket>, MvError> {
    if bucket_seconds <= 0 {
        return Err(MvError::BadConfig("bucket must be positive".into()));
    }
    if expression.terms.is_empty() {
        return Err(MvError::NoMeters);
    }

    let mut totals: BTreeMap<i64, f64> = BTreeMap::new();
    let mut coverage: BTreeMap<i64, f64> = BTreeMap::new();

    for term in &expression.terms {
        // Sum the term's streams (one, or three phases).
        let mut term_energy: BTreeMap<i64, f64> = BTreeMap::new();
        let mut term_coverage: BTreeMap<i64, f64> = BTreeMap::new();
        for stream in &term.selection.streams {
            let buckets = match term.selection.kind {
                ChannelKind::Energy => energy_buckets(reader, stream, window, bucket_seconds)?,
                ChannelKind::Power => power_buckets(reader, stream, window, bucket_seconds)?,
            };
            for (b, v) in buckets {
                *term_energy.entry(b).or_insert(0.0) += v;
            }
            for (b, c) in coverage_buckets(reader, stream, window, bucket_seconds)? {
                term_coverage
                    .entry(b)
                    .and_modify(|e| *e = e.min(c))
                    .or_insert(c);
            }
        }
        for (b, v) in term_energy {
            *totals.entry(b).or_insert(0.0) += term.sign.factor() * v;
        }
        // A bucket missing from a term entirely has zero coverage.
        let all_buckets: Vec<i64> = totals.keys().cloned().collect();
        for b in all_buckets {
            let c = term_coverage.get(&b).copied().unwrap_or(0.0);
            coverage.entry(b).and_modify(|e| *e = e.min(c)).or_insert(c);
        }
    }

    Ok(totals
        .into_iter()
        .map(|(start, value_kwh)| {
            let min_coverage = coverage.get(&start).copied().unwrap_or(0.0);
            EnergyBucket {
                start,
                value_kwh,
                complete: min_coverage >= completeness_threshold,
                min_coverage,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{Observation, StreamMeta};

    fn store() -> TimeseriesStore {
        TimeseriesStore::new()
    }

    fn add_energy(store: &TimeseriesStore, id: &str, interval: i64, obs: &[(i64, f64)]) {
        store
            .create_stream(StreamMeta {
                stream_id: id.into(),
                quantity_kind: QuantityKind::Energy,
                unit: "kWh".into(),
                bound_point: None,
                expected_interval_seconds: Some(interval),
                owner_target: None,
            })
            .unwrap();
        let batch: Vec<Observation> = obs.iter().map(|&(t, v)| Observation::new(t, v)).collect();
        store.append(id, &batch).unwrap();
    }

    fn term(sign: Sign, meter: &str, stream: &str) -> MeterTerm {
        MeterTerm {
            sign,
            meter: Iri::new(format!("urn:m:{meter}")).unwrap(),
            selection: PointSelection {
                kind: ChannelKind::Energy,
                points: vec![],
                streams: vec![stream.to_string()],
                sense: "net".into(),
                phase_sum: false,
            },
        }
    }

    #[test]
    fn signed_sum_of_daily_terms() {
        let store = store();
        let day: Vec<(i64, f64)> = (0..48).map(|i| (i * 1800, 10.0 / 48.0)).collect();
        add_energy(&store, "a", 1800, &day);
        let day_b: Vec<(i64, f64)> = (0..48).map(|i| (i * 1800, 5.0 / 48.0)).collect();
        add_energy(&store, "b", 1800, &day_b);

        let expr = MeterExpression {
            terms: vec![term(Sign::Plus, "A", "a"), term(Sign::Plus, "B", "b")],
        };
        let buckets = compute_net_consumption(
            &store,
            &expr,
            Window::new(0, 86_400).unwrap(),
            86_400,
            0.9,
        )
        .unwrap();
        assert_eq!(buckets.len(), 1);
        assert!((buckets[0].value_kwh - 15.0).abs() < 1e-9);
        assert!(buckets[0].complete);

        let net = MeterExpression {
            terms: vec![term(Sign::Plus, "A", "a"), term(Sign::Minus, "B", "b")],
        };
        let buckets = compute_net_consumption(
            &store,
            &net,
            Window::new(0, 86_400).unwrap(),
            86_400,
            0.9,
        )
        .unwrap();
        assert!((buckets[0].value_kwh - 5.0).abs() < 1e-9);
    }

    #[test]
    fn half_missing_day_is_flagged_incomplete() {
        let store = store();
        let full: Vec<(i64, f64)> = (0..48).map(|i| (i * 1800, 1.0)).collect();
        add_energy(&store, "full", 1800, &full);
        let half: Vec<(i64, f64)> = (0..24).map(|i| (i * 1800, 1.0)).collect();
        add_energy(&store, "half", 1800, &half);

        let expr = MeterExpression {
            terms: vec![term(Sign::Plus, "A", "full"), term(Sign::Plus, "B", "half")],
        };
        let buckets = compute_net_consumption(
            &store,
            &expr,
            Window::new(0, 86_400).unwrap(),
            86_400,
            0.9,
        )
        .unwrap();
        assert_eq!(buckets.len(), 1);
        assert!(!buckets[0].complete);
        assert!((buckets[0].min_coverage - 0.5).abs() < 1e-9);
    }

    #[test]
    fn power_channel_integrates_trapezoidally() {
        let store = store();
        store
            .create_stream(StreamMeta {
                stream_id: "p".into(),
                quantity_kind: QuantityKind::Power,
                unit: "kW".into(),
                bound_point: None,
                expected_interval_seconds: Some(1800),
                owner_target: None,
            })
            .unwrap();
        // Constant 2 kW for 24 h = 48 kWh.
        let obs: Vec<Observation> = (0..=48).map(|i| Observation::new(i * 1800, 2.0)).collect();
        store.append("p", &obs).unwrap();

        let expr = MeterExpression {
            terms: vec![MeterTerm {
                sign: Sign::Plus,
                meter: Iri::new("urn:m:P").unwrap(),
                selection: PointSelection {
                    kind: ChannelKind::Power,
                    points: vec![],
                    streams: vec!["p".into()],
                    sense: "net".into(),
                    phase_sum: false,
                },
            }],
        };
        let buckets = compute_net_consumption(
            &store,
            &expr,
            Window::new(0, 2 * 86_400).unwrap(),
            86_400,
            0.9,
        )
        .unwrap();
        assert!((buckets[0].value_kwh - 48.0).abs() < 1e-9, "{buckets:?}");
    }

    #[test]
    fn temperature_stream_in_expression_is_a_unit_mismatch() {
        let store = store();
        store
            .create_stream(StreamMeta {
                stream_id: "t".into(),
                quantity_kind: QuantityKind::Temperature,
                unit: "degC".into(),
                bound_point: None,
                expected_interval_seconds: Some(1800),
                owner_target: None,
            })
            .unwrap();
        store.append("t", &[Observation::new(0, 20.0)]).unwrap();
        let expr = MeterExpression {
            terms: vec![term(Sign::Plus, "T", "t")],
        };
        let err = compute_net_consumption(
            &store,
            &expr,
            Window::new(0, 86_400).unwrap(),
            86_400,
            0.9,
        )
        .unwrap_err();
        assert!(matches!(err, MvError::UnitMismatch { .. }));
    }
}

#[cfg(test)]
mod conservation_tests {
    use super::*;
    use crate::timeseries::{Observation, StreamMeta};

    /// When sub-meters exactly partition a parent, the parent expression
    /// total equals the sum of the children.
    #[test]
    fn submeter_partition_conserves_energy() {
        let store = TimeseriesStore::new();
        let mk = |id: &str| {
            store
                .create_stream(StreamMeta {
                    stream_id: id.into(),
                    quantity_kind: QuantityKind::Energy,
                    unit: "kWh".into(),
                    bound_point: None,
                    expected_interval_seconds: Some(86_400),
                    owner_target: None,
                })
                .unwrap();
        };
        mk("parent");
        mk("child-a");
        mk("child-b");
        for d in 0..30i64 {
            let a = 6.0 + (d % 3) as f64;
            let b = 4.0 + (d % 5) as f64;
            store.append("child-a", &[Observation::new(d * 86_400, a)]).unwrap();
            store.append("child-b", &[Observation::new(d * 86_400, b)]).unwrap();
            store.append("parent", &[Observation::new(d * 86_400, a + b)]).unwrap();
        }
        let term = |id: &str| MeterTerm {
            sign: Sign::Plus,
            meter: Iri::new(format!("urn:m:{id}")).unwrap(),
            selection: PointSelection {
                kind: ChannelKind::Energy,
                points: vec![],
                streams: vec![id.to_string()],
                sense: "net".into(),
                phase_sum: false,
            },
        };
        let window = Window::new(0, 30 * 86_400).unwrap();
        let parent = compute_net_consumption(
            &store,
            &MeterExpression { terms: vec![term("parent")] },
            window,
            86_400,
            0.9,
        )
        .unwrap();
        let children = compute_net_consumption(
            &store,
            &MeterExpression { terms: vec![term("child-a"), term("child-b")] },
            window,
            86_400,
            0.9,
        )
        .unwrap();
        assert_eq!(parent.len(), children.len());
        for (p, c) in parent.iter().zip(children.iter()) {
            assert!((p.value_kwh - c.value_kwh).abs() < 1e-9, "day {}", p.start);
        }
    }
}
