//! Parsing and validation of raw plant sensor logs.
//!
//! Input is delimiter-separated text with a header row. A [`ColumnMapping`]
//! binds each semantic channel to a header name. Units are fixed: pressures
//! in psi, flows in gallons per minute, temperature in degrees Celsius. No
//! unit conversion is performed; a log recorded in other units must be
//! converted before ingestion or every downstream threshold is wrong.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::DateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped row of the raw log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecord {
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    pub feed_pressure: f64,
    pub filtrate_pressure: f64,
    pub filtrate_flow: f64,
    pub temperature: f64,
    pub backwash_flow: f64,
    /// Pass-through channels (turbidity, pH, dose, ...). Never read by the
    /// feature pipeline. Missing values are absent, not imputed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSeries {
    pub records: Vec<SensorRecord>,
    pub source_id: String,
    /// Median inter-record interval in seconds, 0 with fewer than two records.
    pub sampling_hint: f64,
}

impl SensorSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Binds semantic channels to header names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub timestamp: Option<String>,
    pub feed_pressure: Option<String>,
    pub filtrate_pressure: Option<String>,
    pub filtrate_flow: Option<String>,
    pub temperature: Option<String>,
    pub backwash_flow: Option<String>,
    /// Optional pass-through columns. Absent headers are ignored.
    pub extras: Vec<String>,
    pub delimiter: char,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            timestamp: Some("timestamp".into()),
            feed_pressure: Some("feed_pressure".into()),
            filtrate_pressure: Some("filtrate_pressure".into()),
            filtrate_flow: Some("filtrate_flow".into()),
            temperature: Some("temperature".into()),
            backwash_flow: Some("backwash_flow".into()),
            extras: Vec::new(),
            delimiter: ',',
        }
    }
}

impl ColumnMapping {
    fn channels(&self) -> [(&'static str, &Option<String>); 6] {
        [
            ("timestamp", &self.timestamp),
            ("feed_pressure", &self.feed_pressure),
            ("filtrate_pressure", &self.filtrate_pressure),
            ("filtrate_flow", &self.filtrate_flow),
            ("temperature", &self.temperature),
            ("backwash_flow", &self.backwash_flow),
        ]
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| Error::Config(format!("delimiter {:?} is not ASCII", self.delimiter)))
    }
}

/// Result of [`parse_sensor_csv`]: the parsed (not yet validated) series and
/// the number of data rows discarded because a required field did not parse.
#[derive(Debug, Clone)]
pub struct ParsedSeries {
    pub series: SensorSeries,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TimeFormat {
    EpochSeconds,
    Rfc3339,
}

fn parse_time(field: &str, format: TimeFormat) -> Option<f64> {
    match format {
        TimeFormat::EpochSeconds => field.parse::<f64>().ok().filter(|t| t.is_finite()),
        TimeFormat::Rfc3339 => DateTime::parse_from_rfc3339(field).ok().map(|dt| {
            dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9
        }),
    }
}

fn detect_time_format(field: &str) -> Option<TimeFormat> {
    [TimeFormat::EpochSeconds, TimeFormat::Rfc3339]
        .into_iter()
        .find(|&f| parse_time(field, f).is_some())
}

/// Parse a delimiter-separated log into a [`SensorSeries`].
///
/// The timestamp format (epoch seconds or RFC 3339) is detected once per
/// file from the first row whose timestamp parses under either format.
/// Rows with a missing or unparseable required field, or a non-finite
/// value, are dropped and counted.
pub fn parse_sensor_csv<R: Read>(
    input: R,
    mapping: &ColumnMapping,
    source_id: &str,
) -> Result<ParsedSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();

    let mut required = [0usize; 6];
    for (slot, (channel, column)) in required.iter_mut().zip(mapping.channels()) {
        let column = column.as_deref().ok_or_else(|| Error::UnmappedChannel {
            channel,
            detail: "no column bound in mapping".into(),
        })?;
        *slot = headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::UnmappedChannel {
                channel,
                detail: format!("column '{column}' not found in header"),
            })?;
    }
    let extras: Vec<(String, usize)> = mapping
        .extras
        .iter()
        .filter_map(|name| headers.iter().position(|h| h == name).map(|i| (name.clone(), i)))
        .collect();

    let mut format = None;
    let mut records = Vec::new();
    let mut dropped = 0usize;
    for row in reader.records() {
        let Ok(row) = row else {
            dropped += 1;
            continue;
        };
        let field = |i: usize| row.get(i).unwrap_or("");
        let time_field = field(required[0]);
        if format.is_none() {
            format = detect_time_format(time_field);
        }
        let Some(timestamp) = format.and_then(|f| parse_time(time_field, f)) else {
            dropped += 1;
            continue;
        };
        let mut values = [0.0f64; 5];
        let mut ok = true;
        for (v, &i) in values.iter_mut().zip(&required[1..]) {
            match field(i).parse::<f64>() {
                Ok(x) if x.is_finite() => *v = x,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            dropped += 1;
            continue;
        }
        let extras = extras
            .iter()
            .filter_map(|(name, i)| {
                row.get(*i)
                    .filter(|s| !s.is_empty())
                    .map(|s| (name.clone(), s.to_string()))
            })
            .collect();
        records.push(SensorRecord {
            timestamp,
            feed_pressure: values[0],
            filtrate_pressure: values[1],
            filtrate_flow: values[2],
            temperature: values[3],
            backwash_flow: values[4],
            extras,
        });
    }

    if records.is_empty() {
        return Err(Error::EmptyInput(format!(
            "{source_id}: no valid rows ({dropped} dropped)"
        )));
    }
    Ok(ParsedSeries {
        series: SensorSeries {
            records,
            source_id: source_id.to_string(),
            sampling_hint: 0.0,
        },
        dropped_rows: dropped,
    })
}

/// Sort by timestamp, collapse duplicate timestamps (last record wins), and
/// recompute the sampling hint.
pub fn validate_series(series: SensorSeries) -> SensorSeries {
    let SensorSeries {
        mut records,
        source_id,
        ..
    } = series;
    // Stable sort keeps input order among equal timestamps, so the last
    // occurrence in each run of duplicates is the last one read.
    records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let mut deduped: Vec<SensorRecord> = Vec::with_capacity(records.len());
    for rec in records {
        match deduped.last_mut() {
            Some(prev) if prev.timestamp == rec.timestamp => *prev = rec,
            _ => deduped.push(rec),
        }
    }
    let sampling_hint = median_gap(&deduped);
    SensorSeries {
        records: deduped,
        source_id,
        sampling_hint,
    }
}

fn median_gap(records: &[SensorRecord]) -> f64 {
    let mut gaps: Vec<f64> = records
        .windows(2)
        .map(|w| w[1].timestamp - w[0].timestamp)
        .collect();
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.sort_by(f64::total_cmp);
    let mid = gaps.len() / 2;
    if gaps.len() % 2 == 1 {
        gaps[mid]
    } else {
        0.5 * (gaps[mid - 1] + gaps[mid])
    }
}

/// Counts of physically suspicious but retained values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub negative_pressures: usize,
    pub negative_flows: usize,
}

pub fn diagnose(series: &SensorSeries) -> SeriesDiagnostics {
    series
        .records
        .iter()
        .fold(SeriesDiagnostics::default(), |mut d, r| {
            if r.feed_pressure < 0.0 || r.filtrate_pressure < 0.0 {
                d.negative_pressures += 1;
            }
            if r.filtrate_flow < 0.0 || r.backwash_flow < 0.0 {
                d.negative_flows += 1;
            }
            d
        })
}

/// Write a series in the format [`parse_sensor_csv`] reads, using the
/// mapping's column names and epoch-second timestamps. Extras are not
/// written.
pub fn write_sensor_csv<W: Write>(
    series: &SensorSeries,
    mapping: &ColumnMapping,
    out: W,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(mapping.delimiter_byte()?)
        .from_writer(out);
    let mut header = Vec::with_capacity(6);
    for (channel, column) in mapping.channels() {
        header.push(column.clone().ok_or_else(|| Error::UnmappedChannel {
            channel,
            detail: "no column bound in mapping".into(),
        })?);
    }
    writer.write_record(&header)?;
    for r in &series.records {
        writer.write_record([
            r.timestamp.to_string(),
            r.feed_pressure.to_string(),
            r.filtrate_pressure.to_string(),
            r.filtrate_flow.to_string(),
            r.temperature.to_string(),
            r.backwash_flow.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
