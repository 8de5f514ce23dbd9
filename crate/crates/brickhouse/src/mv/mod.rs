//! Whole-facility (IPMVP Option C) measurement and verification.
//!
//! The pipeline: discover the meter hierarchy from the published model,
//! select a data channel per meter, compute daily net consumption over the
//! baseline and analysis windows, fit a change-point regression of daily
//! energy on daily mean temperature, and report savings with confidence
//! bounds, gap accounting, and non-routine adjustments.

mod changepoint;
mod consumption;
mod discovery;
mod savings;

pub use changepoint::{fit_baseline, ChangePointModel, DayRecord, ModelVariant, MIN_FIT_DAYS};
pub use consumption::{
    compute_net_consumption, ChannelKind, EnergyBucket, MeterExpression, MeterTerm,
    PointSelection, Sign, StreamReader,
};
pub use discovery::{discover_metering, resolve_expression, select_meter_point, MeteringDiscovery, SignedMeter};
pub use savings::{estimate_savings, MvResult};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::Iri;
use crate::timeseries::{TimeseriesError, Window};

pub const DAY_SECONDS: i64 = 86_400;

#[derive(Debug, Error)]
pub enum MvError {
    #[error("model contains no electrical meters")]
    NoMeters,
    #[error("meter `{0}` has no usable data point (real energy or power with a bound stream)")]
    NoUsablePoint(Iri),
    #[error("stream `{stream}`: {detail}")]
    UnitMismatch { stream: String, detail: String },
    #[error("insufficient usable baseline days: {got} < {need}")]
    InsufficientDays { got: usize, need: usize },
    #[error("no usable analysis days")]
    NoUsableAnalysisDays,
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Timeseries(#[from] TimeseriesError),
}

/// A non-routine adjustment: additive energy over a window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Adjustment {
    pub window: Window,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MvConfig {
    pub baseline: Window,
    pub analysis: Window,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_completeness")]
    pub day_completeness_threshold: f64,
    #[serde(default)]
    pub exclusions: Vec<Window>,
    #[serde(default)]
    pub adjustments: Vec<Adjustment>,
}

fn default_confidence() -> f64 {
    0.95
}

fn default_completeness() -> f64 {
    0.9
}

impl MvConfig {
    pub fn validate(&self) -> Result<(), MvError> {
        if !(0.0 < self.confidence && self.confidence < 1.0) {
            return Err(MvError::BadConfig(format!(
                "confidence {} outside (0, 1)",
                self.confidence
            )));
        }
        if self.baseline.end > self.analysis.start && self.analysis.end > self.baseline.start {
            return Err(MvError::BadConfig(
                "baseline and analysis windows overlap".into(),
            ));
        }
        Ok(())
    }

    fn excluded(&self, day_start: i64) -> bool {
        let day_end = day_start + DAY_SECONDS;
        self.exclusions
            .iter()
            .any(|w| w.start < day_end && w.end > day_start)
    }
}

/// Daily mean of a temperature stream, keyed by UTC day start.
pub fn daily_mean_temperature(
    reader: &dyn StreamReader,
    stream_id: &str,
    window: Window,
) -> Result<BTreeMap<i64, f64>, MvError> {
    let obs = reader.read(stream_id, window)?;
    let mut sums: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for o in obs {
        let day = o.timestamp - o.timestamp.rem_euclid(DAY_SECONDS);
        let entry = sums.entry(day).or_insert((0.0, 0));
        entry.0 += o.value;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(day, (sum, n))| (day, sum / n as f64))
        .collect())
}

/// End-to-end Option C run over an already-bound meter expression and
/// temperature stream. Deterministic for identical store contents.
pub fn run_option_c(
    reader: &dyn StreamReader,
    expression: &MeterExpression,
    temperature_stream: &str,
    config: &MvConfig,
) -> Result<MvResult, MvError> {
    config.validate()?;

    let collect_days = |window: Window| -> Result<(Vec<DayRecord>, usize, usize, f64), MvError> {
        let energy = compute_net_consumption(
            reader,
            expression,
            window,
            DAY_SECONDS,
            config.day_completeness_threshold,
        )?;
        let temps = daily_mean_temperature(reader, temperature_stream, window)?;
        let total_days = (window.duration() / DAY_SECONDS).max(0) as usize;
        let mut usable = Vec::new();
        let mut coverage_sum = 0.0;
        for bucket in &energy {
            coverage_sum += bucket.min_coverage;
            if !bucket.complete || config.excluded(bucket.start) {
                continue;
            }
            let Some(&temp) = temps.get(&bucket.start) else {
                continue;
            };
            usable.push(DayRecord {
                day_start: bucket.start,
                temperature: temp,
                energy_kwh: bucket.value_kwh,
            });
        }
        let excluded = total_days.saturating_sub(usable.len());
        let coverage = if total_days > 0 {
            coverage_sum / total_days as f64
        } else {
            0.0
        };
        Ok((usable, total_days, excluded, coverage))
    };

    let (baseline_days, _, baseline_excluded, baseline_coverage) = collect_days(config.baseline)?;
    let model = fit_baseline(&baseline_days)?;

    let (analysis_days, analysis_total, analysis_excluded, analysis_coverage) =
        collect_days(config.analysis)?;

    // Prorate each adjustment by the usable fraction of its window.
    let mut adjustments_applied = 0.0;
    for adj in &config.adjustments {
        let days_in_window = |w: Window| -> usize {
            analysis_days
                .iter()
                .filter(|d| d.day_start >= w.start && d.day_start < w.end)
                .count()
        };
        let total = ((adj.window.duration() + DAY_SECONDS - 1) / DAY_SECONDS).max(1) as usize;
        let usable = days_in_window(adj.window);
        adjustments_applied += adj.energy_kwh * usable as f64 / total as f64;
    }

    estimate_savings(
        &model,
        &analysis_days,
        analysis_total,
        analysis_excluded,
        analysis_coverage,
        baseline_excluded,
        baseline_coverage,
        adjustments_applied,
        config.confidence,
    )
}
