//! CSV ingestion.
//!
//! Lines starting with `#` and blank lines are skipped; the first data line
//! is treated as a header when its selected fields do not parse as numbers.
//! Timestamps must increase strictly and sit on a uniform cadence (the
//! median step) within 1%. Gaps of up to two missing samples are filled
//! linearly; longer gaps are rejected.

use std::path::Path;

use rfluct_core::series::SpectrumSeries;
use rfluct_core::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, Result};

/// Relative tolerance on each step against the cadence.
pub const CADENCE_TOLERANCE: f64 = 0.01;
/// Longest run of missing samples that is interpolated.
pub const MAX_FILLED_GAP: usize = 2;
/// Cadence below which time series are refused, in seconds.
pub const MIN_CADENCE_SECONDS: f64 = 1.0;
/// Cadence below which a warning is attached, in seconds.
pub const WARN_CADENCE_SECONDS: f64 = 10.0;

/// Picks a column by 1-based position or by header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Position(usize),
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.parse::<usize>() {
            Ok(0) => Err("column positions are 1-based".into()),
            Ok(n) => Ok(Column::Position(n)),
            Err(_) if !s.is_empty() => Ok(Column::Name(s.to_string())),
            Err(_) => Err("empty column name".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub time: Column,
    pub value: Column,
    pub delimiter: char,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            time: Column::Position(1),
            value: Column::Position(2),
            delimiter: ',',
        }
    }
}

/// Whether the abscissa is clock time, which enables the cadence floor
/// and warning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Seconds,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestedSeries {
    #[serde(skip)]
    pub series: SpectrumSeries,
    pub source: String,
    pub source_sha256: String,
    pub samples: usize,
    pub cadence: f64,
    pub interpolated: usize,
    pub warnings: Vec<String>,
}

/// Reads a clock-time series (cadence in seconds).
pub fn ingest_csv(path: &Path, columns: &ColumnSpec) -> Result<IngestedSeries> {
    ingest_csv_as(path, columns, Abscissa::Seconds)
}

pub fn ingest_csv_as(path: &Path, columns: &ColumnSpec, abscissa: Abscissa) -> Result<IngestedSeries> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::io(path, e))?;
    let wrap = |source| CliError::Ingest {
        path: path.display().to_string(),
        source,
    };
    let mut parsed = parse_text(&text, columns, abscissa).map_err(wrap)?;
    parsed.source = path.display().to_string();
    parsed.source_sha256 = hex(&Sha256::digest(&bytes));
    Ok(parsed)
}

fn ingest_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Ingest {
        line,
        reason: reason.into(),
    }
}

fn resolve(col: &Column, header: Option<&[&str]>, line: usize) -> std::result::Result<usize, Error> {
    match col {
        Column::Position(p) => Ok(p - 1),
        Column::Name(name) => header
            .and_then(|h| h.iter().position(|f| f.trim() == name))
            .ok_or_else(|| ingest_err(line, format!("no column named `{name}` in header"))),
    }
}

/// Parses CSV text; the source fields are left empty.
pub fn parse_text(text: &str, columns: &ColumnSpec, abscissa: Abscissa) -> std::result::Result<IngestedSeries, Error> {
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut indices: Option<(usize, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(columns.delimiter).map(str::trim).collect();
        let (ti, vi) = match indices {
            Some(ix) => ix,
            None => {
                let header_like = fields.iter().any(|f| f.parse::<f64>().is_err());
                if header_like && rows.is_empty() {
                    indices = Some((
                        resolve(&columns.time, Some(&fields), line)?,
                        resolve(&columns.value, Some(&fields), line)?,
                    ));
                    continue;
                }
                let ix = (resolve(&columns.time, None, line)?, resolve(&columns.value, None, line)?);
                indices = Some(ix);
                ix
            }
        };
        let field = |k: usize, what: &str| -> std::result::Result<f64, Error> {
            let f = fields
                .get(k)
                .ok_or_else(|| ingest_err(line, format!("missing {what} column {}", k + 1)))?;
            let v: f64 = f
                .parse()
                .map_err(|_| ingest_err(line, format!("unparseable {what} `{f}`")))?;
            if !v.is_finite() {
                return Err(ingest_err(line, format!("non-finite {what} `{f}`")));
            }
            Ok(v)
        };
        rows.push((line, field(ti, "timestamp")?, field(vi, "value")?));
    }

    if rows.len() < 2 {
        return Err(ingest_err(0, format!("need at least 2 data rows, found {}", rows.len())));
    }
    for w in rows.windows(2) {
        if !(w[1].1 > w[0].1) {
            return Err(ingest_err(
                w[1].0,
                format!("timestamp {} does not increase past {} (line {})", w[1].1, w[0].1, w[0].0),
            ));
        }
    }

    let mut steps: Vec<f64> = rows.windows(2).map(|w| w[1].1 - w[0].1).collect();
    steps.sort_by(f64::total_cmp);
    let cadence = steps[steps.len() / 2];
    let mut warnings = Vec::new();
    if abscissa == Abscissa::Seconds {
        if cadence < MIN_CADENCE_SECONDS {
            return Err(ingest_err(0, format!("cadence {cadence} s is below {MIN_CADENCE_SECONDS} s")));
        }
        if cadence < WARN_CADENCE_SECONDS {
            warnings.push(format!(
                "cadence {cadence} s is finer than the {WARN_CADENCE_SECONDS} s resolution the estimator is validated at"
            ));
        }
    }

    let start = rows[0].1;
    let mut values = vec![rows[0].2];
    let mut interpolated = 0;
    for w in rows.windows(2) {
        let (_, t0, v0) = w[0];
        let (line, t1, v1) = w[1];
        let ratio = (t1 - t0) / cadence;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > CADENCE_TOLERANCE {
            return Err(ingest_err(
                line,
                format!("step {} is off the {cadence} cadence by more than 1%", t1 - t0),
            ));
        }
        let missing = k as usize - 1;
        if missing > MAX_FILLED_GAP {
            return Err(ingest_err(
                line,
                format!("gap of {missing} missing samples exceeds the {MAX_FILLED_GAP}-sample fill limit"),
            ));
        }
        for j in 1..=missing {
            let f = j as f64 / k;
            values.push(v0 + f * (v1 - v0));
        }
        interpolated += missing;
        values.push(v1);
    }
    if interpolated > 0 {
        warnings.push(format!("{interpolated} missing samples filled by linear interpolation"));
    }

    Ok(IngestedSeries {
        samples: values.len(),
        series: SpectrumSeries::new(start, cadence, values),
        source: String::new(),
        source_sha256: String::new(),
        cadence,
        interpolated,
        warnings,
    })
}
