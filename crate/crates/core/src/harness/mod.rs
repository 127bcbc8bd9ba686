//! Convergence experiments, empirical path metrics, result rows and the CLI.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod metrics;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, OutputFormat};
pub use experiments::run_experiment;
pub use metrics::{local_time_tv, projection_gap, sp_distance, sup_distance, LocalTimeTv};
pub use report::{read_rows, render, write_rows, ResultRow, SCHEMA_VERSION};
