//! Data-health analysis over a stream window: stale runs, out-of-range
//! values, future timestamps, and coverage gaps.
//!
//! The reference clock is injected through the policy, never read from the
//! wall, so findings are reproducible. Range checking uses the bound
//! point's `rangeMin`/`rangeMax` entity properties and is skipped entirely
//! when those properties are absent — an unusual value is only reportable
//! against the modelled expectations of the installation site.

use serde::Serialize;

use crate::timeseries::{Observation, StreamMeta, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthKind {
    Stale,
    OutOfRange,
    FutureTimestamp,
    Gap,
}

#[derive(Debug, Clone, Serialize)]
pub struct HealthFinding {
    pub stream_id: String,
    pub kind: HealthKind,
    pub window: Window,
    pub detail: String,
}

/// Expected value range resolved from the bound point's entity properties.
#[derive(Debug, Clone, Copy, Default)]
pub struct RangeBounds {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl RangeBounds {
    pub fn is_empty(&self) -> bool {
        self.min.is_none() && self.max.is_none()
    }

    fn violates(&self, v: f64) -> bool {
        self.min.is_some_and(|m| v < m) || self.max.is_some_and(|m| v > m)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HealthPolicy {
    /// A run of identical consecutive values spanning at least this long is
    /// stale.
    pub stale_span_seconds: i64,
    /// Tolerated clock skew before a timestamp counts as future.
    pub future_skew_seconds: i64,
    /// Minimum uncovered span reported as a gap; `None` derives
    /// 2 × expected interval (at least an hour) from the stream metadata.
    pub gap_seconds: Option<i64>,
    /// Injected reference clock (UTC seconds).
    pub now: i64,
}

impl HealthPolicy {
    pub fn with_now(now: i64) -> Self {
        HealthPolicy {
            stale_span_seconds: 6 * 3600,
            future_skew_seconds: 300,
            gap_seconds: None,
            now,
        }
    }

    fn effective_gap(&self, meta: &StreamMeta) -> i64 {
        self.gap_seconds.unwrap_or_else(|| {
            meta.expected_interval_seconds
                .map(|i| (2 * i).max(3600))
                .unwrap_or(2 * 3600)
        })
    }
}

/// Pure analysis of one stream window: identical inputs produce identical
/// findings. `range` carries the bound point's expected range, if modelled.
pub fn run_health_checks(
    stream_id: &str,
    meta: &StreamMeta,
    observations: &[Observation],
    range: RangeBounds,
    window: Window,
    policy: &HealthPolicy,
) -> Vec<HealthFinding> {
    let mut findings = Vec::new();

    // (a) stale: maximal runs of identical consecutive values.
    let mut run_start = 0;
    for i in 1..=observations.len() {
        let run_ended = i == observations.len()
            || observations[i].value.to_bits() != observations[run_start].value.to_bits();
        if run_ended {
            if i - run_start >= 2 {
                let first = observations[run_start].timestamp;
                let last = observations[i - 1].timestamp;
                if last - first >= policy.stale_span_seconds {
                    findings.push(HealthFinding {
                        stream_id: stream_id.to_string(),
                        kind: HealthKind::Stale,
                        window: Window { start: first, end: last + 1 },
                        detail: format!(
                            "{} identical readings of {} spanning {} s",
                            i - run_start,
                            observations[run_start].value,
                            last - first
                        ),
                    });
                }
            }
            run_start = i;
        }
    }

    // (b) out of range, skipped when no range properties are modelled.
    if !range.is_empty() {
        let mut i = 0;
        while i < observations.len() {
            if range.violates(observations[i].value) {
                let start = i;
                while i < observations.len() && range.violates(observations[i].value) {
                    i += 1;
                }
                let first = observations[start].timestamp;
                let last = observations[i - 1].timestamp;
                findings.push(HealthFinding {
                    stream_id: stream_id.to_string(),
                    kind: HealthKind::OutOfRange,
                    window: Window { start: first, end: last + 1 },
                    detail: format!(
                        "{} value(s) outside [{}, {}], e.g. {}",
                        i - start,
                        range.min.map_or("-inf".into(), |v| v.to_string()),
                        range.max.map_or("+inf".into(), |v| v.to_string()),
                        observations[start].value
                    ),
                });
            } else {
                i += 1;
            }
        }
    }

    // (c) future timestamps relative to the injected clock.
    let horizon = policy.now + policy.future_skew_seconds;
    let future: Vec<&Observation> = observations.iter().filter(|o| o.timestamp > horizon).collect();
    if let (Some(first), Some(last)) = (future.first(), future.last()) {
        findings.push(HealthFinding {
            stream_id: stream_id.to_string(),
            kind: HealthKind::FutureTimestamp,
            window: Window { start: first.timestamp, end: last.timestamp + 1 },
            detail: format!(
                "{} observation(s) ahead of reference clock {} (+{} s skew)",
                future.len(),
                policy.now,
                policy.future_skew_seconds
            ),
        });
    }

    // (d) coverage gaps, including the window edges.
    let gap_threshold = policy.effective_gap(meta);
    let mut boundaries: Vec<i64> = Vec::with_capacity(observations.len() + 2);
    boundaries.push(window.start);
    boundaries.extend(observations.iter().map(|o| o.timestamp));
    boundaries.push(window.end.min(policy.now));
    for pair in boundaries.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a >= gap_threshold {
            findings.push(HealthFinding {
                stream_id: stream_id.to_string(),
                kind: HealthKind::Gap,
                window: Window { start: a, end: b },
                detail: format!("no coverage for {} s (threshold {} s)", b - a, gap_threshold),
            });
        }
    }

    findings
}
