//! Command-line experiment runner for `fbp-core`.

pub mod config;
pub mod run;

pub use config::{ExperimentConfig, Pipeline};
pub use run::{run, Verdict};
