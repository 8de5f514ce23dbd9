//! The JSON gateway payload: a gateway id and a list of source points, each
//! with timestamped observations. Validation is strict — unknown fields are
//! rejected and errors name the JSON path of the offending value.
//!
//! ```json
//! {
//!   "gateway": "gw-7",
//!   "points": [
//!     { "source_point_name": "oa_temp",
//!       "observations": [ {"t": "2024-06-01T00:00:00Z", "v": 21.5, "q": "actual"} ] }
//!   ]
//! }
//! ```

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{Map, Value};

use super::IngestError;
use crate::timeseries::{Observation, Quality};

#[derive(Debug, Clone, PartialEq)]
pub struct SourcePoint {
    pub source_point_name: String,
    pub observations: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DchPayload {
    pub gateway: String,
    pub points: Vec<SourcePoint>,
}

type Result<T> = std::result::Result<T, IngestError>;

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| IngestError::schema(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| IngestError::schema(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| IngestError::schema(path, "expected a string"))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(IngestError::schema(
                format!("{path}.{key}"),
                format!("unknown field `{key}`"),
            ));
        }
    }
    Ok(())
}

fn parse_timestamp(text: &str, path: &str) -> Result<i64> {
    let parsed = DateTime::parse_from_rfc3339(text).map_err(|e| IngestError::BadTimestamp {
        path: path.to_string(),
        message: format!("`{text}`: {e}"),
    })?;
    Ok(parsed.with_timezone(&Utc).timestamp())
}

/// Parses and schema-validates a payload document.
pub fn parse_dch_payload(text: &str) -> Result<DchPayload> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| IngestError::schema("$", format!("malformed JSON: {e}")))?;
    let obj = as_object(&value, "$")?;
    reject_unknown(obj, &["gateway", "points"], "$")?;
    let gateway = as_str(
        obj.get("gateway")
            .ok_or_else(|| IngestError::schema("$", "missing `gateway`"))?,
        "$.gateway",
    )?
    .to_string();
    let points_value = as_array(
        obj.get("points")
            .ok_or_else(|| IngestError::schema("$", "missing `points`"))?,
        "$.points",
    )?;

    let mut points = Vec::new();
    for (pi, point) in points_value.iter().enumerate() {
        let ppath = format!("$.points[{pi}]");
        let pobj = as_object(point, &ppath)?;
        reject_unknown(pobj, &["source_point_name", "observations"], &ppath)?;
        let name = as_str(
            pobj.get("source_point_name")
                .ok_or_else(|| IngestError::schema(&ppath, "missing `source_point_name`"))?,
            &format!("{ppath}.source_point_name"),
        )?
        .to_string();
        let obs_value = as_array(
            pobj.get("observations")
                .ok_or_else(|| IngestError::schema(&ppath, "missing `observations`"))?,
            &format!("{ppath}.observations"),
        )?;
        let mut observations = Vec::new();
        for (oi, o) in obs_value.iter().enumerate() {
            let opath = format!("{ppath}.observations[{oi}]");
            let oobj = as_object(o, &opath)?;
            reject_unknown(oobj, &["t", "v", "q"], &opath)?;
            let t = parse_timestamp(
                as_str(
                    oobj.get("t")
                        .ok_or_else(|| IngestError::schema(&opath, "missing `t`"))?,
                    &format!("{opath}.t"),
                )?,
                &format!("{opath}.t"),
            )?;
            let v = oobj
                .get("v")
                .ok_or_else(|| IngestError::schema(&opath, "missing `v`"))?
                .as_f64()
                .ok_or_else(|| IngestError::schema(format!("{opath}.v"), "expected a number"))?;
            if !v.is_finite() {
                return Err(IngestError::schema(
                    format!("{opath}.v"),
                    "value must be finite",
                ));
            }
            let quality = match oobj.get("q") {
                Some(q) => as_str(q, &format!("{opath}.q"))?
                    .parse::<Quality>()
                    .map_err(|e| IngestError::schema(format!("{opath}.q"), e))?,
                None => Quality::Actual,
            };
            observations.push(Observation {
                timestamp: t,
                value: v,
                quality,
            });
        }
        points.push(SourcePoint {
            source_point_name: name,
            observations,
        });
    }

    Ok(DchPayload { gateway, points })
}

/// Serializes a payload back to its JSON form (UTC timestamps, explicit
/// quality). `parse(serialize(p))` reproduces `p` exactly.
pub fn serialize_dch_payload(payload: &DchPayload) -> String {
    let points: Vec<Value> = payload
        .points
        .iter()
        .map(|p| {
            let obs: Vec<Value> = p
                .observations
                .iter()
                .map(|o| {
                    let t = DateTime::<Utc>::from_timestamp(o.timestamp, 0)
                        .expect("valid timestamp")
                        .to_rfc3339_opts(SecondsFormat::Secs, true);
                    serde_json::json!({"t": t, "v": o.value, "q": o.quality.to_string()})
                })
                .collect();
            serde_json::json!({"source_point_name": p.source_point_name, "observations": obs})
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "gateway": payload.gateway,
        "points": points,
    }))
    .unwrap()
}
