//! Experiment runner for the `pais-core` sampler: JSON configuration, the
//! `run`, `tune`, `bench-resamplers` and `generate-data` subcommands, and
//! their CSV/JSON artifacts.

pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use config::{parse_config, ExperimentSpec, TargetSpec};
pub use error::CliError;
