use super::prepare_dir;
use crate::config::ExperimentSpec;
use crate::output::{header, num, CsvFile};
use anyhow::Result;
use pais_core::diagnostics::{normalized_weights, weighted_moment};
use pais_core::resamplers::{ResampleMode, Resampler, ResamplerKind};
use pais_core::rng::{stream, Purpose};
use pais_core::Points;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::time::Instant;

/// One line of `resampler_bench.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: usize,
    pub resampler: ResamplerKind,
    /// Mean over repeats of the relative error in moments 1..3 against the
    /// weighted sample.
    pub moment_errors: [f64; 3],
    /// Median wall time of one resampling, seconds.
    pub seconds: f64,
}

const KINDS: [ResamplerKind; 3] = [
    ResamplerKind::Etpf,
    ResamplerKind::Amr,
    ResamplerKind::Bootstrap,
];

/// `M` draws from `N(1, 2)` weighted toward `N(2, 3)`.
fn weighted_sample(seed: u64, m: usize, repeat: usize) -> (Points, Vec<f64>) {
    let mut rng = stream(seed, Purpose::Benchmark, m as u64, repeat as u64);
    let proposal = Normal::new(1.0, 2f64.sqrt()).unwrap();
    let y: Vec<f64> = (0..m).map(|_| proposal.sample(&mut rng)).collect();
    let lw = y
        .iter()
        .map(|v| -(v - 2.0).powi(2) / 6.0 + (v - 1.0).powi(2) / 4.0)
        .collect();
    (Points::from_scalars(&y), lw)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `bench-resamplers`: writes `resampler_bench.csv`. Timings run one at a
/// time on the calling thread.
pub fn cmd_bench_resamplers(spec: &ExperimentSpec, seed: u64, dir: &Path) -> Result<Vec<BenchRow>> {
    let repeats = spec.bench.repeats;
    let mut rows = Vec::new();
    for &m in &spec.bench.sizes {
        let mut errors = [[0.0; 3]; 3];
        let mut times: [Vec<f64>; 3] = Default::default();
        for r in 0..repeats {
            let (y, lw) = weighted_sample(seed, m, r);
            let w = normalized_weights(&lw)?;
            let values: Vec<f64> = y.coordinate(0).collect();
            let exact: Vec<f64> = (1..=3)
                .map(|p| weighted_moment(&values, Some(&w), p))
                .collect::<pais_core::Result<_>>()?;
            for (k, kind) in KINDS.iter().enumerate() {
                let resampler = Resampler::new(*kind, ResampleMode::Deterministic);
                let mut rng = stream(seed, Purpose::Resample, m as u64, r as u64);
                let start = Instant::now();
                let out = resampler.resample(&y, &lw, &mut rng)?;
                times[k].push(start.elapsed().as_secs_f64());
                let out: Vec<f64> = out.coordinate(0).collect();
                for p in 0..3 {
                    let est = weighted_moment(&out, None, p as u32 + 1)?;
                    errors[k][p] += ((est - exact[p]) / exact[p]).abs() / repeats as f64;
                }
            }
        }
        for (k, kind) in KINDS.iter().enumerate() {
            rows.push(BenchRow {
                m,
                resampler: *kind,
                moment_errors: errors[k],
                seconds: median(std::mem::take(&mut times[k])),
            });
        }
    }
    prepare_dir(dir)?;
    let mut f = CsvFile::create(
        &dir.join("resampler_bench.csv"),
        &spec.hash(),
        seed,
        &header(&["m", "resampler", "err_m1", "err_m2", "err_m3", "seconds"]),
    )?;
    for r in &rows {
        let name = serde_json::to_value(r.resampler)?;
        f.row([
            r.m.to_string(),
            name.as_str().unwrap_or_default().to_string(),
            num(r.moment_errors[0]),
            num(r.moment_errors[1]),
            num(r.moment_errors[2]),
            num(r.seconds),
        ])?;
    }
    f.finish()?;
    Ok(rows)
}
