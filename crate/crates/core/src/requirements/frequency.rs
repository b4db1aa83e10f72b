//! Failure rates per DTC from fleet field data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spec_model::FieldFailureRecord;

/// One failure per 50,000 operating hours.
pub const DEFAULT_BENCHMARK_RATE_PER_HOUR: f64 = 1.0 / 50_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyEstimate {
    pub dtc_code: String,
    pub occurrence_count: u64,
    pub exposure_hours: f64,
    /// `k / T`.
    pub point_rate_per_hour: f64,
    /// `(k + 1) / T`, never zero.
    pub upper_bound_per_hour: f64,
    /// Point rate strictly above the benchmark.
    pub exceeds_benchmark: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrequencyError {
    #[error("benchmark rate must be positive and finite, got {0}")]
    InvalidBenchmark(f64),
}

/// Estimates per DTC, summing counts and exposures of repeated codes.
/// Sorted by DTC code.
pub fn estimate_frequency(
    records: &[FieldFailureRecord],
    benchmark_rate_per_hour: f64,
) -> Result<Vec<FrequencyEstimate>, FrequencyError> {
    if !(benchmark_rate_per_hour.is_finite() && benchmark_rate_per_hour > 0.0) {
        return Err(FrequencyError::InvalidBenchmark(benchmark_rate_per_hour));
    }
    let mut totals: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
    for r in records {
        let t = totals.entry(r.dtc_code.as_str()).or_insert((0, 0.0));
        t.0 += r.occurrence_count;
        t.1 += r.exposure_hours;
    }
    Ok(totals
        .into_iter()
        .map(|(code, (k, hours))| {
            let point = k as f64 / hours;
            FrequencyEstimate {
                dtc_code: code.to_owned(),
                occurrence_count: k,
                exposure_hours: hours,
                point_rate_per_hour: point,
                upper_bound_per_hour: (k as f64 + 1.0) / hours,
                exceeds_benchmark: point > benchmark_rate_per_hour,
            }
        })
        .collect())
}

/// CSV export with header
/// `dtc_code,point_rate_per_hour,upper_bound_per_hour,exceeds_benchmark`.
pub fn frequencies_csv(estimates: &[FrequencyEstimate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "dtc_code",
        "point_rate_per_hour",
        "upper_bound_per_hour",
        "exceeds_benchmark",
    ]);
    for e in estimates {
        let _ = w.write_record([
            e.dtc_code.clone(),
            format!("{:e}", e.point_rate_per_hour),
            format!("{:e}", e.upper_bound_per_hour),
            e.exceeds_benchmark.to_string(),
        ]);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}
