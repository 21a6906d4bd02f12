use super::{geometric_mean, prepare_dir};
use crate::config::ExperimentSpec;
use crate::output::{header, num, opt, write_json, CsvFile};
use anyhow::{bail, Result};
use pais_core::diagnostics::relative_l2_error;
use pais_core::engine::{self, Objective, SamplerKind};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// One line of `sweep.csv`: geometric means over repeats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub mean_ess: Option<f64>,
    pub var_w: Option<f64>,
    pub acc_rate: Option<f64>,
    pub l2_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub rows: Vec<SweepRow>,
    /// Argmax ESS (PAIS) or argmin `|acceptance − target|` (MH).
    pub beta_star: f64,
}

struct Stats {
    ess: Option<f64>,
    var_w: Option<f64>,
    acc: Option<f64>,
    l2: Option<f64>,
}

/// `tune`: runs every grid value of `β` for `repeats` seeds (`seed + r`)
/// with adaptation off, and writes `sweep.csv` and `tune.json`.
pub fn cmd_tune(spec: &ExperimentSpec, seed: u64, dir: &Path) -> Result<TuneResult> {
    let Some(sweep) = &spec.sweep else {
        bail!("tune needs a `sweep` section in the config");
    };
    let target = spec.target.build()?;
    let target = target.as_ref();
    let grid = sweep.grid();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|b| (0..spec.repeats).map(move |r| (b, r)))
        .collect();
    let stats: Vec<Stats> = jobs
        .par_iter()
        .map(|&(b, r)| -> Result<Stats> {
            let mut config = spec.run_config(seed + r as u64);
            config.kernel.beta = grid[b];
            config.adaptation.enabled = false;
            let out = engine::run(target, &config)?;
            let samples = out.samples()?;
            let start = out.analysis_start();
            let l2 = match target.reference() {
                Some(reference) if samples.iterations() > start => {
                    let h = samples.histogram(&reference.density_grid.grid, start, usize::MAX)?;
                    Some(relative_l2_error(&h, &reference.density_grid)?)
                }
                _ => None,
            };
            let finite = |v: f64| v.is_finite().then_some(v);
            Ok(Stats {
                ess: finite(out.mean_ess()),
                var_w: finite(out.mean_weight_variance()),
                acc: out.acceptance_rate(config.ensemble_size),
                l2,
            })
        })
        .collect::<Result<_>>()?;

    let rows: Vec<SweepRow> = grid
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let s = &stats[b * spec.repeats..(b + 1) * spec.repeats];
            let gm =
                |f: fn(&Stats) -> Option<f64>| geometric_mean(&s.iter().map(f).collect::<Vec<_>>());
            SweepRow {
                beta,
                mean_ess: gm(|s| s.ess),
                var_w: gm(|s| s.var_w),
                acc_rate: gm(|s| s.acc),
                l2_error: gm(|s| s.l2),
            }
        })
        .collect();

    let beta_star = optimal_beta(spec, &rows)?;
    prepare_dir(dir)?;
    let mut f = CsvFile::create(
        &dir.join("sweep.csv"),
        &spec.hash(),
        seed,
        &header(&["beta", "mean_ess", "var_w", "acc_rate", "l2_error"]),
    )?;
    for r in &rows {
        f.row([
            num(r.beta),
            opt(r.mean_ess),
            opt(r.var_w),
            opt(r.acc_rate),
            opt(r.l2_error),
        ])?;
    }
    f.finish()?;
    let result = TuneResult { rows, beta_star };
    write_json(&dir.join("tune.json"), &result)?;
    Ok(result)
}

fn optimal_beta(spec: &ExperimentSpec, rows: &[SweepRow]) -> Result<f64> {
    // Ties go to the first (smallest) grid value.
    let best = |score: &dyn Fn(&SweepRow) -> Option<f64>| {
        rows.iter()
            .filter_map(|r| score(r).map(|s| (r.beta, s)))
            .fold(None, |acc: Option<(f64, f64)>, (b, s)| match acc {
                Some((_, best)) if best >= s => acc,
                _ => Some((b, s)),
            })
            .map(|(b, _)| b)
    };
    let beta = match (spec.sampler, spec.adaptation.objective_for(spec.sampler)) {
        (SamplerKind::Mh, Objective::Acceptance { target }) => {
            best(&|r| r.acc_rate.map(|a| -(a - target).abs()))
        }
        _ => best(&|r| r.mean_ess),
    };
    beta.ok_or_else(|| anyhow::anyhow!("no grid value produced a usable statistic"))
}
