//! Parse a NEM12 interval-metering document, expand it to UTC
//! observations, ingest it into the time-series store, and read back daily
//! sums and completeness.
//!
//! Run with: `cargo run --example ingest_nem12`

use brickhouse::ingest::parse_nem12;
use brickhouse::timeseries::{
    AggregateFn, QuantityKind, StreamMeta, TimeseriesStore, Window,
};

const SAMPLE: &str = include_str!("../fixtures/sample_nem12.csv");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The site reports in local time at UTC+10.
    let offset = 10 * 3600;
    let (document, series) = parse_nem12(SAMPLE, offset)?;

    for block in &document.blocks {
        println!(
            "NMI {} at {}-minute intervals, unit {}, {} day record(s)",
            block.nmi,
            block.interval_minutes,
            block.unit,
            block.days.len()
        );
    }

    let store = TimeseriesStore::new();
    for (nmi, observations) in &series {
        let stream_id = format!("meter-{nmi}");
        store.create_stream(StreamMeta {
            stream_id: stream_id.clone(),
            quantity_kind: QuantityKind::Energy,
            unit: "kWh".into(),
            bound_point: None,
            expected_interval_seconds: Some(1800),
            owner_target: None,
        })?;
        let report = store.append(&stream_id, observations)?;
        println!(
            "\ningested {} observation(s) into {stream_id} ({} replaced)",
            report.inserted, report.replaced
        );

        let first = observations.first().unwrap().timestamp;
        let last = observations.last().unwrap().timestamp;
        let window = Window::new(first, last + 1800)?;
        for bucket in store.aggregate(&stream_id, window, 86_400, AggregateFn::Sum)? {
            println!("  day starting {}: {:.1} kWh", bucket.start, bucket.value);
        }
        let completeness = store.completeness(&stream_id, window, 1800)?;
        println!("  completeness over the window: {completeness:.3}");
    }
    Ok(())
}
