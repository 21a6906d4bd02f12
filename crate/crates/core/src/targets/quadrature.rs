//! Quadrature helpers used to build [`AnalyticReference`](super::AnalyticReference)s.

use crate::diagnostics::{kl_divergence, BinnedDensity, GridSpec};
use crate::{log_sum_exp, Execution};

/// Composite trapezoid nodes on `[lo, hi]`, with the weights stored as logs.
pub(crate) struct Trapezoid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Trapezoid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        assert!(points >= 2 && hi > lo);
        let h = (hi - lo) / (points - 1) as f64;
        let nodes = (0..points).map(|i| lo + h * i as f64).collect();
        let weights = (0..points)
            .map(|i| {
                if i == 0 || i == points - 1 {
                    0.5 * h
                } else {
                    h
                }
            })
            .collect();
        Trapezoid { nodes, weights }
    }
}

/// Composite Simpson weights for `2n` sub-intervals of width `h`.
fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    debug_assert!(intervals.is_multiple_of(2));
    (0..=intervals)
        .map(|i| {
            let c = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Summary of a one-dimensional unnormalized density.
pub(crate) struct Reference1d {
    pub log_normalizer: f64,
    pub moments: [f64; 3],
    pub kl_prior: f64,
}

/// Normalizer, raw moments and `KL(π‖π₀)` by trapezoid quadrature.
pub(crate) fn summarize_1d(
    log_density: impl Fn(f64) -> f64,
    log_prior: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Reference1d {
    let rule = Trapezoid::new(lo, hi, points);
    let log_f: Vec<f64> = rule.nodes.iter().map(|&x| log_density(x)).collect();
    let terms: Vec<f64> = log_f
        .iter()
        .zip(&rule.weights)
        .map(|(l, w)| l + w.ln())
        .collect();
    let log_z = log_sum_exp(&terms);
    let mut moments = [0.0; 3];
    for ((x, l), w) in rule.nodes.iter().zip(&log_f).zip(&rule.weights) {
        let p = (l - log_z).exp() * w;
        moments[0] += p * x;
        moments[1] += p * x * x;
        moments[2] += p * x * x * x;
    }
    let log_post: Vec<f64> = log_f.iter().map(|l| l - log_z).collect();
    let log_prior: Vec<f64> = rule.nodes.iter().map(|&x| log_prior(x)).collect();
    let kl_prior = kl_divergence(&rule.weights, &log_post, &log_prior);
    Reference1d {
        log_normalizer: log_z,
        moments,
        kl_prior,
    }
}

/// Bin masses of a 1-D density normalized by `log_z`, by composite Simpson
/// with `sub` (even) sub-intervals per bin.
pub(crate) fn bin_masses_1d(
    log_density: impl Fn(f64) -> f64,
    log_z: f64,
    grid: &GridSpec,
    sub: usize,
) -> BinnedDensity {
    let axis = grid.axes[0];
    let w = simpson_weights(sub, axis.width() / sub as f64);
    let integrals = (0..axis.bins)
        .map(|k| {
            let a = axis.edge(k);
            let b = axis.edge(k + 1);
            w.iter()
                .enumerate()
                .map(|(i, wi)| {
                    let x = a + (b - a) * i as f64 / sub as f64;
                    wi * (log_density(x) - log_z).exp()
                })
                .sum()
        })
        .collect();
    BinnedDensity {
        grid: grid.clone(),
        integrals,
    }
}

/// Everything a 2-D reference needs from one lattice evaluation.
pub(crate) struct Reference2d {
    pub density_grid: BinnedDensity,
    pub moments: Vec<[f64; 3]>,
    pub kl_prior: f64,
    pub log_normalizer: f64,
}

/// Evaluates `log_density` on a lattice refining every bin of `grid` into
/// `sub × sub` Simpson cells and integrates bin masses, moments and the KL
/// divergence from that lattice. The normalizer is the lattice integral, so
/// the grid must cover essentially all posterior mass.
pub(crate) fn summarize_2d(
    log_density: impl Fn(&[f64]) -> f64 + Sync,
    log_prior: impl Fn(&[f64]) -> f64 + Sync,
    grid: &GridSpec,
    sub: usize,
) -> Reference2d {
    let (ax, ay) = (grid.axes[0], grid.axes[1]);
    let nx = ax.bins * sub + 1;
    let ny = ay.bins * sub + 1;
    let hx = ax.width() / sub as f64;
    let hy = ay.width() / sub as f64;
    let xs: Vec<f64> = (0..nx).map(|i| ax.lo + hx * i as f64).collect();
    let ys: Vec<f64> = (0..ny).map(|j| ay.lo + hy * j as f64).collect();
    let log_f: Vec<Vec<f64>> = Execution::Parallel.map(nx, |i| {
        ys.iter().map(|&y| log_density(&[xs[i], y])).collect()
    });
    let max = log_f
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let wx = simpson_weights(sub, hx);
    let wy = simpson_weights(sub, hy);

    // Bin masses relative to exp(max); global Simpson weights are the sum of
    // the per-bin weights, so the same loop yields everything.
    let mut masses = vec![0.0; ax.bins * ay.bins];
    let mut global_w = vec![vec![0.0; ny]; nx];
    for bx in 0..ax.bins {
        for by in 0..ay.bins {
            let mut m = 0.0;
            for (a, wa) in wx.iter().enumerate() {
                let i = bx * sub + a;
                for (b, wb) in wy.iter().enumerate() {
                    let j = by * sub + b;
                    let q = wa * wb;
                    global_w[i][j] += q;
                    m += q * (log_f[i][j] - max).exp();
                }
            }
            masses[bx * ay.bins + by] = m;
        }
    }
    let total: f64 = masses.iter().sum();
    let log_z = max + total.ln();
    let integrals = masses.iter().map(|m| m / total).collect();

    let mut moments = vec![[0.0; 3]; 2];
    let mut qw = Vec::with_capacity(nx * ny);
    let mut lp = Vec::with_capacity(nx * ny);
    let mut l0 = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let p = (log_f[i][j] - log_z).exp() * global_w[i][j];
            for (c, v) in [xs[i], ys[j]].into_iter().enumerate() {
                moments[c][0] += p * v;
                moments[c][1] += p * v * v;
                moments[c][2] += p * v * v * v;
            }
            if log_f[i][j] > f64::NEG_INFINITY {
                qw.push(global_w[i][j]);
                lp.push(log_f[i][j] - log_z);
                l0.push(log_prior(&[xs[i], ys[j]]));
            }
        }
    }
    Reference2d {
        density_grid: BinnedDensity {
            grid: grid.clone(),
            integrals,
        },
        moments,
        kl_prior: kl_divergence(&qw, &lp, &l0),
        log_normalizer: log_z,
    }
}
