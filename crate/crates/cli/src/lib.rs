//! Library side of the `qmpi` command: configuration, experiment runs and
//! reports.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{parse_config, ConfigError, ExperimentSpec, RawConfig, ReportFormat};
pub use experiment::{run_experiment, run_one, ExperimentOutcome, RunFailure, RunRecord};
