//! Experiment harness for `lyapunov-lab`: flat TOML configs, dispatch to the
//! library, deterministic outputs and parameter sweeps.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiment::{run_experiment, ResultRecord, RunError, Verdict};
pub use report::{emit_report, ReportError};
pub use sweep::{sweep, SweepPoint};
