//! Real-data ingestion and complete-case reduction.
//!
//! Records with an uncensored response and no missing covariates form a
//! response-biased sample whenever censoring/truncation is independent of
//! the data and covariates are missing at random — so the rank estimator
//! runs on the complete cases unchanged. That independence is a modeling
//! assumption the caller asserts; it is not checkable from the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Which CSV columns hold what.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnMap {
    pub y: String,
    pub z: String,
    pub x: Vec<String>,
    /// Censoring indicator column: 1 = event observed, 0 = censored.
    pub delta: Option<String>,
    /// Left-truncation value column; blank cells mean "not truncated".
    pub trunc: Option<String>,
}

impl ColumnMap {
    pub fn new(y: impl Into<String>, z: impl Into<String>, x: Vec<String>) -> Self {
        ColumnMap {
            y: y.into(),
            z: z.into(),
            x,
            delta: None,
            trunc: None,
        }
    }
}

/// One parsed data row. Covariate cells may be missing; response and anchor
/// must parse or the row is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub y: f64,
    pub z: f64,
    pub x: Vec<Option<f64>>,
    pub delta: Option<bool>,
    pub trunc: Option<f64>,
}

/// A row that failed validation, with its 1-based line number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub reason: String,
}

/// Parse outcome: good records plus a reject report (never silently
/// dropped rows).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadReport {
    pub records: Vec<RawRecord>,
    pub rejects: Vec<RejectedRow>,
}

/// Provenance of a complete-case reduction. Categories are disjoint and
/// exhaustive: `kept + dropped_censored + dropped_missing = input`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Provenance {
    pub input: usize,
    pub kept: usize,
    /// Records with `delta = 0`; counted here even if covariates were also
    /// missing (censoring takes priority in the accounting).
    pub dropped_censored: usize,
    pub dropped_missing: usize,
}

/// Load a UTF-8 CSV with a header row; `#` lines are comments, the decimal
/// point is `.`. Rows that fail validation land in the reject report.
pub fn load_csv(path: impl AsRef<Path>, map: &ColumnMap) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let headers = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("required column '{name}' not found")))
    };
    let y_col = index_of(&map.y)?;
    let z_col = index_of(&map.z)?;
    let x_cols: Vec<usize> = map
        .x
        .iter()
        .map(|c| index_of(c))
        .collect::<Result<_>>()?;
    if x_cols.is_empty() {
        return Err(Error::Schema("at least one covariate column required".into()));
    }
    let delta_col = map.delta.as_deref().map(index_of).transpose()?;
    let trunc_col = map.trunc.as_deref().map(index_of).transpose()?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, y_col, z_col, &x_cols, delta_col, trunc_col) {
            Ok(rec) => records.push(rec),
            Err(reason) => rejects.push(RejectedRow { line, reason }),
        }
    }
    Ok(LoadReport { records, rejects })
}

fn parse_row(
    row: &csv::StringRecord,
    y_col: usize,
    z_col: usize,
    x_cols: &[usize],
    delta_col: Option<usize>,
    trunc_col: Option<usize>,
) -> std::result::Result<RawRecord, String> {
    let cell = |i: usize| row.get(i).unwrap_or("");
    let required = |name: &str, i: usize| -> std::result::Result<f64, String> {
        let raw = cell(i);
        if raw.is_empty() {
            return Err(format!("{name} is blank"));
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| format!("{name} = '{raw}' is not numeric"))?;
        if !v.is_finite() {
            return Err(format!("{name} = {v} is not finite"));
        }
        Ok(v)
    };

    let y = required("y", y_col)?;
    let z = required("z", z_col)?;

    let mut x = Vec::with_capacity(x_cols.len());
    for (k, &c) in x_cols.iter().enumerate() {
        let raw = cell(c);
        if raw.is_empty() {
            x.push(None);
        } else {
            let v: f64 = raw
                .parse()
                .map_err(|_| format!("x{k} = '{raw}' is not numeric"))?;
            if !v.is_finite() {
                return Err(format!("x{k} = {v} is not finite"));
            }
            x.push(Some(v));
        }
    }

    let delta = match delta_col {
        None => None,
        Some(c) => match cell(c) {
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(format!("delta = '{other}' is not 0 or 1")),
        },
    };

    let trunc = match trunc_col {
        None => None,
        Some(c) => {
            let raw = cell(c);
            if raw.is_empty() {
                None
            } else {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| format!("trunc = '{raw}' is not numeric"))?;
                if y < v {
                    return Err(format!(
                        "y = {y} below its truncation value {v}; the record could \
                         not have been observed"
                    ));
                }
                Some(v)
            }
        }
    };

    Ok(RawRecord {
        y,
        z,
        x,
        delta,
        trunc,
    })
}

/// Write records in the same layout `load_csv` reads.
pub fn write_csv(path: impl AsRef<Path>, records: &[RawRecord], map: &ColumnMap) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<&str> = vec![&map.y, &map.z];
    header.extend(map.x.iter().map(String::as_str));
    if let Some(d) = &map.delta {
        header.push(d);
    }
    if let Some(t) = &map.trunc {
        header.push(t);
    }
    writer.write_record(&header)?;

    for rec in records {
        let mut row: Vec<String> = vec![rec.y.to_string(), rec.z.to_string()];
        for xv in &rec.x {
            row.push(xv.map(|v| v.to_string()).unwrap_or_default());
        }
        if map.delta.is_some() {
            row.push(match rec.delta {
                Some(true) => "1".to_string(),
                Some(false) => "0".to_string(),
                None => "1".to_string(),
            });
        }
        if map.trunc.is_some() {
            row.push(rec.trunc.map(|v| v.to_string()).unwrap_or_default());
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Keep uncensored records with fully observed covariates.
///
/// Left-truncated records stay in: with truncation independent of the data
/// the observed rows already form a response-biased sample. Returns the
/// dataset and the provenance counts.
pub fn complete_cases(records: &[RawRecord]) -> Result<(Dataset<f64>, Provenance)> {
    let input = records.len();
    let d = records
        .first()
        .map(|r| r.x.len())
        .ok_or_else(|| Error::InsufficientData("no records".into()))?;
    if records.iter().any(|r| r.x.len() != d) {
        return Err(Error::DimensionMismatch(
            "records disagree on the number of covariates".into(),
        ));
    }

    let mut dropped_censored = 0usize;
    let mut dropped_missing = 0usize;
    let mut y = Vec::new();
    let mut z = Vec::new();
    let mut x = Vec::new();
    for rec in records {
        if rec.delta == Some(false) {
            dropped_censored += 1;
            continue;
        }
        if rec.x.iter().any(Option::is_none) {
            dropped_missing += 1;
            continue;
        }
        y.push(rec.y);
        z.push(rec.z);
        x.extend(rec.x.iter().map(|v| v.unwrap()));
    }

    let kept = y.len();
    if kept < 2 {
        return Err(Error::InsufficientData(format!(
            "{kept} complete cases from {input} records; need at least 2"
        )));
    }
    let data = Dataset::new(y, z, x, d)?;
    Ok((
        data,
        Provenance {
            input,
            kept,
            dropped_censored,
            dropped_missing,
        },
    ))
}

/// View a dataset as complete records (uncensored, nothing missing), e.g.
/// for writing simulated samples to disk.
pub fn dataset_to_records(data: &Dataset<f64>) -> Vec<RawRecord> {
    (0..data.n())
        .map(|i| RawRecord {
            y: data.y()[i],
            z: data.z()[i],
            x: data.x_row(i).iter().map(|&v| Some(v)).collect(),
            delta: None,
            trunc: None,
        })
        .collect()
}
