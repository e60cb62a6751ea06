//! Named experiments, their configuration documents, reports and sweeps.

pub mod config;
pub mod experiments;
pub mod initial;
pub mod report;
pub mod sweep;

pub use config::{ExperimentConfig, ExperimentKind, InitialSpec, Params};
pub use experiments::{log_log_slope, run_experiment};
pub use initial::initial_field;
pub use report::{EstimateReport, Series, SCHEMA_VERSION};
pub use sweep::{aggregate_csv, run_sweep, summarize, SweepJob, SweepOutcome, SweepSummary};
