//! NEM12 interval metering data (the AEMO interchange CSV).
//!
//! Supported record types: 100 (header), 200 (NMI data details), 300
//! (interval data), 900 (end). Reason/transaction records (400/500) are
//! rejected with a clear unsupported-record error. Interval values are
//! expanded to observations at interval-start boundaries, converted from
//! site local time to UTC with the supplied offset.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use super::IngestError;
use crate::timeseries::{Observation, Quality};

#[derive(Debug, Clone)]
pub struct Nem12Day {
    pub date: NaiveDate,
    pub values: Vec<f64>,
    pub quality_flag: char,
    pub quality: Quality,
}

#[derive(Debug, Clone)]
pub struct Nem12Block {
    pub nmi: String,
    pub interval_minutes: u32,
    pub unit: String,
    pub days: Vec<Nem12Day>,
}

#[derive(Debug, Clone, Default)]
pub struct Nem12Document {
    pub blocks: Vec<Nem12Block>,
}

impl Nem12Document {
    pub fn observation_count(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.days.iter().map(|d| d.values.len()).sum::<usize>())
            .sum()
    }
}

fn map_quality(flag: char) -> Option<Quality> {
    match flag {
        'A' => Some(Quality::Actual),
        'E' | 'S' => Some(Quality::Substituted),
        'F' | 'N' | 'V' => Some(Quality::Suspect),
        _ => None,
    }
}

/// Parses a NEM12 document and expands each NMI's interval values into
/// UTC-timestamped observations. `site_utc_offset_seconds` is the site's
/// fixed offset from UTC (e.g. +36000 for UTC+10).
pub fn parse_nem12(
    text: &str,
    site_utc_offset_seconds: i64,
) -> Result<(Nem12Document, BTreeMap<String, Vec<Observation>>), IngestError> {
    let mut document = Nem12Document::default();
    let mut series: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    let mut current: Option<Nem12Block> = None;
    let mut saw_header = false;
    let mut saw_terminator = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if saw_terminator {
            return Err(IngestError::Nem12 {
                line: line_no,
                message: "content after 900 terminator".into(),
            });
        }
        let fields: Vec<&str> = line.split(',').collect();
        match fields[0] {
            "100" => {
                if saw_header {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: "duplicate 100 header".into(),
                    });
                }
                if fields.get(1).copied() != Some("NEM12") {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: "header does not declare NEM12".into(),
                    });
                }
                saw_header = true;
            }
            "200" => {
                if !saw_header {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: "200 record before 100 header".into(),
                    });
                }
                if let Some(block) = current.take() {
                    document.blocks.push(block);
                }
                if fields.len() < 9 {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: format!("200 record has {} fields, expected at least 9", fields.len()),
                    });
                }
                let interval_minutes: u32 = fields[8].parse().map_err(|_| IngestError::Nem12 {
                    line: line_no,
                    message: format!("bad interval length `{}`", fields[8]),
                })?;
                if interval_minutes == 0 || 1440 % interval_minutes != 0 {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: format!("interval length {interval_minutes} does not divide a day"),
                    });
                }
                current = Some(Nem12Block {
                    nmi: fields[1].to_string(),
                    interval_minutes,
                    unit: fields[7].to_string(),
                    days: Vec::new(),
                });
            }
            "300" => {
                let block = current.as_mut().ok_or_else(|| IngestError::Nem12 {
                    line: line_no,
                    message: "300 record without preceding 200 record".into(),
                })?;
                let expected = (1440 / block.interval_minutes) as usize;
                let date = NaiveDate::parse_from_str(fields[1], "%Y%m%d").map_err(|_| {
                    IngestError::Nem12 {
                        line: line_no,
                        message: format!("bad date `{}`", fields[1]),
                    }
                })?;
                // Interval values run until the quality-method field (the
                // first non-numeric field), which fixes the actual count.
                let mut values = Vec::with_capacity(expected);
                let mut cursor = 2;
                while cursor < fields.len() {
                    let Ok(v) = fields[cursor].parse::<f64>() else {
                        break;
                    };
                    if !v.is_finite() {
                        return Err(IngestError::Nem12 {
                            line: line_no,
                            message: format!(
                                "non-finite interval value at position {}",
                                cursor - 1
                            ),
                        });
                    }
                    values.push(v);
                    cursor += 1;
                }
                if values.len() != expected {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: format!(
                            "300 record carries {} interval values, expected {expected}",
                            values.len()
                        ),
                    });
                }
                if cursor >= fields.len() {
                    return Err(IngestError::Nem12 {
                        line: line_no,
                        message: "300 record is missing its quality method".into(),
                    });
                }
                let quality_field = fields[cursor];
                let flag = quality_field.chars().next().unwrap_or(' ');
                let quality = map_quality(flag).ok_or_else(|| IngestError::Nem12 {
                    line: line_no,
                    message: format!("unknown quality flag `{quality_field}`"),
                })?;
                block.days.push(Nem12Day {
                    date,
                    values,
                    quality_flag: flag,
                    quality,
                });
            }
            "400" | "500" => {
                return Err(IngestError::UnsupportedRecord {
                    line: line_no,
                    record: fields[0].to_string(),
                })
            }
            "900" => {
                saw_terminator = true;
                if let Some(block) = current.take() {
                    document.blocks.push(block);
                }
            }
            other => {
                return Err(IngestError::Nem12 {
                    line: line_no,
                    message: format!("unknown record type `{other}`"),
                })
            }
        }
    }

    if !saw_header {
        return Err(IngestError::Nem12 {
            line: 1,
            message: "missing 100 header".into(),
        });
    }
    if !saw_terminator {
        return Err(IngestError::Nem12 {
            line: text.lines().count().max(1),
            message: "missing 900 terminator".into(),
        });
    }

    for block in &document.blocks {
        let step = block.interval_minutes as i64 * 60;
        let out = series.entry(block.nmi.clone()).or_default();
        for day in &block.days {
            let local_midnight = day.date.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp();
            let day_start_utc = local_midnight - site_utc_offset_seconds;
            for (i, &v) in day.values.iter().enumerate() {
                out.push(Observation {
                    timestamp: day_start_utc + i as i64 * step,
                    value: v,
                    quality: day.quality,
                });
            }
        }
    }

    Ok((document, series))
}
