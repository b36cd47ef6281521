use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::formats::FORMAT_VERSION;

/// Outcome of one benchmark trial, in completion-independent trial order.
///
/// `seed` is the per-trial instance seed (base seed plus trial index); the
/// solver seed is derived the same way, so a record pins the whole trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub solved: bool,
    pub steps: u64,
    pub restarts: u64,
    pub elapsed_ms: u64,
}

/// Five-number summary of one metric across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatLine {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Aggregate view of a benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub format_version: u32,
    pub trials: u64,
    pub success_rate: f64,
    pub steps: StatLine,
    pub elapsed_secs: StatLine,
}

/// Summarizes per-trial records; errors on an empty slice.
pub fn summarize(records: &[TrialRecord]) -> Result<SummaryStats, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let solved = records.iter().filter(|r| r.solved).count();
    let steps: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    let secs: Vec<f64> = records.iter().map(|r| r.elapsed_ms as f64 / 1000.0).collect();
    Ok(SummaryStats {
        format_version: FORMAT_VERSION,
        trials: records.len() as u64,
        success_rate: solved as f64 / records.len() as f64,
        steps: stat_line(steps),
        elapsed_secs: stat_line(secs),
    })
}

/// The median of an even-length sample is the lower of the two middle
/// values, so every reported statistic is a value that actually occurred.
fn stat_line(mut values: Vec<f64>) -> StatLine {
    values.sort_by(|a, b| a.partial_cmp(b).expect("metrics are finite"));
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    };
    StatLine {
        mean,
        sd,
        median: values[(n - 1) / 2],
        min: values[0],
        max: values[n - 1],
    }
}
