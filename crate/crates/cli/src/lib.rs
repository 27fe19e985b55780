//! Experiment runner: configuration, pipeline and run summaries.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{parse, ConfigError, ExperimentConfig, CHECKS};
pub use pipeline::{resolve_out, run, RunError, RunOutcome};
