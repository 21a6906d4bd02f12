use super::prepare_dir;
use crate::config::{ExperimentSpec, SCHEMA_VERSION};
use crate::output::{write_diagnostics, write_json, CsvFile, CsvSink};
use anyhow::{Context, Result};
use pais_core::diagnostics::relative_l2_error;
use pais_core::engine::{run_with_sink, SamplerKind, SamplerOutput, WeightedSamples};
use pais_core::targets::Target;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub ensemble_size: usize,
    pub iterations: usize,
    pub burn_in: Option<usize>,
    pub final_beta: f64,
    pub mean_ess: Option<f64>,
    pub mean_weight_variance: Option<f64>,
    pub acceptance_rate: Option<f64>,
    pub drift_fallbacks: usize,
    pub adaptation_events: usize,
    /// Pooled weighted mean per coordinate after burn-in.
    pub posterior_mean: Option<Vec<f64>>,
    /// Relative L² error of the pooled histogram against the reference.
    pub l2_error: Option<f64>,
    /// Relative error of moments 1..3 per coordinate; `null` where the
    /// reference moment is zero.
    pub moment_errors: Option<Vec<[Option<f64>; 3]>>,
    pub wall_time_seconds: f64,
}

/// One run into `dir` (or nowhere). Returns the summary, the engine output
/// and the kept sample stream.
pub fn execute_run(
    spec: &ExperimentSpec,
    target: &dyn Target,
    seed: u64,
    dir: Option<&Path>,
) -> Result<(RunSummary, SamplerOutput)> {
    let config = spec.run_config(seed);
    let hash = spec.hash();
    let dim = target.dim();
    let file = match dir {
        Some(d) if spec.outputs.samples => {
            prepare_dir(d)?;
            Some(CsvFile::create(
                &d.join("weighted_samples.csv"),
                &hash,
                seed,
                &CsvSink::sample_header(dim),
            )?)
        }
        _ => None,
    };
    let mut sink = CsvSink::new(file, dim, config.ensemble_size);
    let start = Instant::now();
    let result = run_with_sink(target, &config, &mut sink);
    let wall = start.elapsed().as_secs_f64();
    let samples = sink.finish()?;
    let mut out = result.context("sampler failed")?;

    let mut summary = summarize(spec, target, seed, &hash, &out, &samples)?;
    summary.wall_time_seconds = wall;
    out.samples = Some(samples);
    if let Some(d) = dir {
        prepare_dir(d)?;
        if spec.outputs.diagnostics {
            write_diagnostics(
                &d.join("diagnostics.csv"),
                &hash,
                seed,
                &out.diagnostics,
                config.ensemble_size,
                out.burn_in,
            )?;
        }
        write_json(&d.join("summary.json"), &summary)?;
    }
    Ok((summary, out))
}

fn summarize(
    spec: &ExperimentSpec,
    target: &dyn Target,
    seed: u64,
    hash: &str,
    out: &SamplerOutput,
    samples: &WeightedSamples,
) -> Result<RunSummary> {
    let start = out.analysis_start();
    let has_samples = samples.iterations() > start;
    let finite = |v: f64| v.is_finite().then_some(v);
    let mut summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        name: spec.name.clone(),
        config_hash: hash.to_string(),
        seed,
        sampler: spec.sampler,
        ensemble_size: spec.ensemble_size,
        iterations: spec.iterations,
        burn_in: out.burn_in,
        final_beta: out.final_beta,
        mean_ess: finite(out.mean_ess()),
        mean_weight_variance: finite(out.mean_weight_variance()),
        acceptance_rate: out.acceptance_rate(spec.ensemble_size),
        drift_fallbacks: out.diagnostics.iter().map(|d| d.drift_fallbacks).sum(),
        adaptation_events: out.adaptation.len(),
        posterior_mean: None,
        l2_error: None,
        moment_errors: None,
        wall_time_seconds: 0.0,
    };
    if !has_samples {
        return Ok(summary);
    }
    let end = samples.iterations();
    let mut means = Vec::with_capacity(target.dim());
    let mut moments = Vec::with_capacity(target.dim());
    for c in 0..target.dim() {
        let m = samples.moments(c, start, end)?;
        means.push(m[0]);
        moments.push(m);
    }
    summary.posterior_mean = Some(means);
    if let Some(reference) = target.reference() {
        let hist = samples.histogram(&reference.density_grid.grid, start, end)?;
        summary.l2_error = Some(relative_l2_error(&hist, &reference.density_grid)?);
        summary.moment_errors = Some(
            moments
                .iter()
                .zip(&reference.moments)
                .map(|(est, exact)| {
                    std::array::from_fn(|k| {
                        (exact[k] != 0.0).then(|| ((est[k] - exact[k]) / exact[k]).abs())
                    })
                })
                .collect(),
        );
    }
    Ok(summary)
}

/// `run`: one directory per repeat (`repeat_<r>`, seed + r) or `dir` itself
/// for a single repeat.
pub fn cmd_run(spec: &ExperimentSpec, seed: u64, dir: &Path) -> Result<Vec<RunSummary>> {
    let target = spec.target.build()?;
    prepare_dir(dir)?;
    (0..spec.repeats)
        .map(|r| {
            let run_dir = if spec.repeats == 1 {
                dir.to_path_buf()
            } else {
                dir.join(format!("repeat_{r}"))
            };
            execute_run(spec, target.as_ref(), seed + r as u64, Some(&run_dir)).map(|s| s.0)
        })
        .collect()
}
