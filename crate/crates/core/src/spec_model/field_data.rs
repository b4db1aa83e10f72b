//! Fleet field data: how often each DTC was seen over the observed exposure.

use serde::{Deserialize, Serialize};

pub const FIELD_DATA_HEADER: [&str; 3] = ["dtc_code", "occurrence_count", "exposure_hours"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFailureRecord {
    pub dtc_code: String,
    pub occurrence_count: u64,
    /// Fleet vehicle-hours observed, always positive.
    pub exposure_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldDataError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: exposure_hours must be positive")]
    NonPositiveExposure { line: u64 },
}

/// Parses a field data CSV with header `dtc_code,occurrence_count,exposure_hours`.
pub fn parse_field_data(text: &str) -> Result<Vec<FieldFailureRecord>, FieldDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let malformed = |line: u64, reason: String| FieldDataError::MalformedRow { line, reason };
    let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line());
    let csv_err = |e: csv::Error| FieldDataError::MalformedRow {
        line: e.position().map_or(0, |p| p.line()),
        reason: e.to_string(),
    };

    let header = match records.next() {
        Some(r) => r.map_err(csv_err)?,
        None => return Err(malformed(1, "missing header row".into())),
    };
    if header.iter().map(str::trim).ne(FIELD_DATA_HEADER) {
        // The reader places the first record at the start of leading comments.
        let header_line = text
            .lines()
            .position(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map_or(1, |i| i as u64 + 1);
        return Err(malformed(
            header_line,
            format!("header must be `{}`", FIELD_DATA_HEADER.join(",")),
        ));
    }

    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = line_of(&rec);
        if rec.len() != 3 {
            return Err(malformed(
                line,
                format!("expected 3 fields, found {}", rec.len()),
            ));
        }
        let dtc_code = rec[0].trim();
        if dtc_code.is_empty() {
            return Err(malformed(line, "empty dtc_code".into()));
        }
        let occurrence_count = rec[1].trim().parse::<u64>().map_err(|_| {
            malformed(
                line,
                format!("invalid occurrence_count `{}`", rec[1].trim()),
            )
        })?;
        let exposure_hours = rec[2]
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| {
                malformed(line, format!("invalid exposure_hours `{}`", rec[2].trim()))
            })?;
        if exposure_hours <= 0.0 {
            return Err(FieldDataError::NonPositiveExposure { line });
        }
        out.push(FieldFailureRecord {
            dtc_code: dtc_code.to_owned(),
            occurrence_count,
            exposure_hours,
        });
    }
    Ok(out)
}
