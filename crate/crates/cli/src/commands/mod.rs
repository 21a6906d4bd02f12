//! Subcommands. Each one writes its artifacts into a directory and returns
//! the computed table so callers can inspect it without re-reading files.

mod bench;
mod data;
mod run;
mod tune;

pub use bench::{cmd_bench_resamplers, BenchRow};
pub use data::cmd_generate_data;
pub use run::{cmd_run, execute_run, RunSummary};
pub use tune::{cmd_tune, SweepRow, TuneResult};

use anyhow::{Context, Result};
use std::path::Path;

pub(crate) fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Geometric mean; `None` when any value is missing, zero gives zero.
pub fn geometric_mean(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| !v.is_some_and(|x| x >= 0.0)) {
        return None;
    }
    let vals: Vec<f64> = values.iter().map(|v| v.unwrap()).collect();
    if vals.contains(&0.0) {
        return Some(0.0);
    }
    Some((vals.iter().map(|v| v.ln()).sum::<f64>() / vals.len() as f64).exp())
}
