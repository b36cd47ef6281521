//! Experiment harness for the EFX solvers: versioned instance and
//! allocation files, per-trial record streams with summary statistics, and
//! a deterministic multi-worker benchmark runner. The `efx` binary in this
//! crate exposes all of it on the command line.

pub mod error;
pub mod experiment;
pub mod formats;
pub mod stats;

pub use error::HarnessError;
pub use experiment::{
    effective_workers, run_experiment, run_trial, ExperimentConfig, SolverKind, WORKERS_ENV,
};
pub use formats::{
    allocation_from_json, allocation_to_json, instance_digest, instance_from_json,
    instance_to_json, read_allocation, read_instance, read_records, record_to_line,
    records_from_jsonl, records_to_csv, write_allocation, write_instance, FORMAT_VERSION,
};
pub use stats::{summarize, StatLine, SummaryStats, TrialRecord};
