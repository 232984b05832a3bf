//! Config-driven runs, sweeps and the built-in verification corpus.

pub mod config;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{ExperimentConfig, FieldIssue, Format, InstanceSpec};
pub use report::{emit, to_csv, to_json, Check, ReportRow, CSV_HEADER};
pub use runner::{run, RunError, RunOptions};
pub use verify::{verify, VerifyReport};
