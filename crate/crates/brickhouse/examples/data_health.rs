//! Run the data-health checks over streams with injected anomalies: a
//! stale run of identical readings, an out-of-range value judged against
//! the bound point's modelled range, a future timestamp from a drifting
//! clock, and a coverage gap. A clean control stream yields no findings.
//!
//! Run with: `cargo run --example data_health`

use brickhouse::ingest::{run_health_checks, HealthPolicy, RangeBounds};
use brickhouse::timeseries::{Observation, QuantityKind, StreamMeta, Window};

fn meta(id: &str) -> StreamMeta {
    StreamMeta {
        stream_id: id.into(),
        quantity_kind: QuantityKind::Temperature,
        unit: "degC".into(),
        bound_point: None,
        expected_interval_seconds: Some(1800),
        owner_target: None,
    }
}

/// Half-hourly readings oscillating around 21 °C.
fn clean_series(n: usize) -> Vec<Observation> {
    (0..n)
        .map(|i| Observation::new(i as i64 * 1800, 21.0 + ((i % 5) as f64) * 0.3))
        .collect()
}

fn main() {
    let day = Window::new(0, 86_400).unwrap();
    let policy = HealthPolicy::with_now(86_400);

    let control = clean_series(48);
    let findings = run_health_checks("control", &meta("control"), &control, RangeBounds::default(), day, &policy);
    println!("control stream: {} finding(s)", findings.len());

    // A gateway kept repeating the last reading for 13 hours.
    let mut stale = clean_series(48);
    for obs in stale.iter_mut().take(40).skip(14) {
        obs.value = 19.5;
    }
    report("stale", &stale, RangeBounds::default(), day, &policy);

    // A thermocouple fault reads 0 °C; the model says this office point
    // should stay within [5, 45] °C.
    let mut out_of_range = clean_series(48);
    out_of_range[20].value = 0.0;
    report(
        "office-temp",
        &out_of_range,
        RangeBounds { min: Some(5.0), max: Some(45.0) },
        day,
        &policy,
    );
    // The same reading with no modelled range is not reportable: it could
    // be a freezer.
    report("freezer-temp", &out_of_range, RangeBounds::default(), day, &policy);

    // A drifted clock stamps a reading ten minutes into the future.
    let mut future = clean_series(46);
    future.push(Observation::new(86_400 + 600, 21.0));
    report("drifting-clock", &future, RangeBounds::default(), Window::new(0, 2 * 86_400).unwrap(), &policy);

    // A four-hour outage.
    let mut gappy: Vec<Observation> = clean_series(16);
    gappy.extend((24..48).map(|i| Observation::new(i * 1800, 21.0 + ((i % 5) as f64) * 0.3)));
    report("outage", &gappy, RangeBounds::default(), day, &policy);
}

fn report(
    name: &str,
    observations: &[Observation],
    range: RangeBounds,
    window: Window,
    policy: &HealthPolicy,
) {
    let findings = run_health_checks(name, &meta(name), observations, range, window, policy);
    println!("\n{name}: {} finding(s)", findings.len());
    for f in findings {
        println!(
            "  [{:?}] {} (window {}..{})",
            f.kind, f.detail, f.window.start, f.window.end
        );
    }
}
