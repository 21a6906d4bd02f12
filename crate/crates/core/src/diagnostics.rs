//! Sample-quality statistics: effective sample size, weight variance,
//! histograms on rectangular grids, the relative L² histogram error, relative
//! moment errors and KL divergence by quadrature.
//!
//! Weights enter as natural logarithms throughout. Every function that needs
//! linear weights normalizes them with a max shift first, so inputs spanning
//! hundreds of orders of magnitude are fine.

use crate::{log_sum_exp, Error, Points, Result};
use serde::{Deserialize, Serialize};

/// Per-iteration sampler statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub iteration: usize,
    /// `(Σw)² / Σw²`, in `[1, M]`. Always `M` for Metropolis-Hastings rows.
    pub ess: f64,
    /// Sample variance of the weights rescaled to mean one.
    pub weight_variance: f64,
    /// Accepted moves this iteration (Metropolis-Hastings only).
    pub acceptance_count: Option<usize>,
    pub beta: f64,
    /// Langevin proposals whose drifted mean left the support and fell back to
    /// the undrifted center.
    pub drift_fallbacks: usize,
    /// Mean of `log π` over the ensemble after the iteration.
    pub mean_log_density: f64,
}

impl DiagnosticsRecord {
    pub fn acceptance_rate(&self, ensemble_size: usize) -> Option<f64> {
        self.acceptance_count
            .map(|a| a as f64 / ensemble_size as f64)
    }
}

fn check_weights(log_weights: &[f64]) -> Result<f64> {
    if log_weights
        .iter()
        .any(|w| w.is_nan() || *w == f64::INFINITY)
    {
        return Err(Error::Diagnostic("weights must be finite or -inf".into()));
    }
    let lse = log_sum_exp(log_weights);
    if lse == f64::NEG_INFINITY {
        return Err(Error::Diagnostic("all weights are zero".into()));
    }
    Ok(lse)
}

/// Self-normalized linear weights (summing to one).
pub fn normalized_weights(log_weights: &[f64]) -> Result<Vec<f64>> {
    let lse = check_weights(log_weights)?;
    Ok(log_weights.iter().map(|w| (w - lse).exp()).collect())
}

/// Effective sample size `(Σw)² / Σw²`, evaluated as
/// `exp(2·lse(log w) − lse(2·log w))`.
pub fn ess(log_weights: &[f64]) -> Result<f64> {
    let lse = check_weights(log_weights)?;
    let mut finite = log_weights.iter().filter(|w| **w > f64::NEG_INFINITY);
    let first = *finite.next().expect("checked: one weight is finite");
    let (mut count, mut even) = (1usize, true);
    for w in finite {
        count += 1;
        even &= *w == first;
    }
    if even {
        return Ok(count as f64);
    }
    let doubled: Vec<f64> = log_weights.iter().map(|w| 2.0 * w).collect();
    let value = (2.0 * lse - log_sum_exp(&doubled)).exp();
    // Roundoff can push a perfectly even ensemble a hair above M.
    Ok(value.clamp(1.0, log_weights.len() as f64))
}

/// Sample variance (denominator `M − 1`) of the weights after rescaling them to
/// mean one. Zero for a single weight.
pub fn weight_variance(log_weights: &[f64]) -> Result<f64> {
    let m = log_weights.len();
    let normalized = normalized_weights(log_weights)?;
    if m < 2 || log_weights.iter().all(|w| *w == log_weights[0]) {
        // Exact zero for an even ensemble.
        return Ok(0.0);
    }
    let scale = m as f64;
    let ss: f64 = normalized
        .iter()
        .map(|w| {
            let d = w * scale - 1.0;
            d * d
        })
        .sum();
    Ok(ss / (scale - 1.0))
}

/// One axis of a rectangular histogram grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / self.bins as f64
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        let k = ((x - self.lo) / self.width()) as usize;
        Some(k.min(self.bins - 1))
    }
}

/// Geometry of a uniform rectangular grid in one or two dimensions. Bins are
/// numbered with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn one_d(lo: f64, hi: f64, bins: usize) -> Self {
        GridSpec {
            axes: vec![Axis { lo, hi, bins }],
        }
    }

    pub fn two_d(x: (f64, f64, usize), y: (f64, f64, usize)) -> Self {
        GridSpec {
            axes: vec![
                Axis {
                    lo: x.0,
                    hi: x.1,
                    bins: x.2,
                },
                Axis {
                    lo: y.0,
                    hi: y.1,
                    bins: y.2,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::param("grid", "histograms support 1 or 2 dimensions"));
        }
        for a in &self.axes {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.hi > a.lo) || a.bins == 0 {
                return Err(Error::param("grid", format!("bad axis {a:?}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn bin_count(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }

    pub fn bin_volume(&self) -> f64 {
        self.axes.iter().map(Axis::width).product()
    }

    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut index = 0;
        for (a, &v) in self.axes.iter().zip(x) {
            index = index * a.bins + a.locate(v)?;
        }
        Some(index)
    }

    /// `(lo, hi)` per axis for flat bin index `index`.
    pub fn bin_bounds(&self, index: usize) -> Vec<(f64, f64)> {
        let mut rest = index;
        let mut bounds = vec![(0.0, 0.0); self.axes.len()];
        for (slot, a) in bounds.iter_mut().zip(&self.axes).rev() {
            let k = rest % a.bins;
            rest /= a.bins;
            *slot = (a.edge(k), a.edge(k + 1));
        }
        bounds
    }
}

/// Reference probability mass `∫_{R_i} π` of every bin of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedDensity {
    pub grid: GridSpec,
    pub integrals: Vec<f64>,
}

impl BinnedDensity {
    pub fn total_mass(&self) -> f64 {
        self.integrals.iter().sum()
    }
}

/// A weighted histogram normalized to a density over its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramGrid {
    pub grid: GridSpec,
    /// Bin values `B_i`, normalized so that `Σ v·B_i = 1` over the grid (all
    /// zero when no mass fell inside).
    pub values: Vec<f64>,
    /// Fraction of the total sample weight that fell outside the grid.
    pub out_of_range: f64,
}

impl HistogramGrid {
    pub fn in_range_mass(&self) -> f64 {
        let v = self.grid.bin_volume();
        self.values.iter().map(|b| b * v).sum()
    }
}

/// Bins `samples` with optional linear `weights` (unnormalized is fine).
pub fn build_histogram(
    samples: &Points,
    weights: Option<&[f64]>,
    grid: &GridSpec,
) -> Result<HistogramGrid> {
    grid.validate()?;
    if samples.dim() != grid.dim() {
        return Err(Error::Diagnostic(format!(
            "samples are {}-dimensional but the grid is {}-dimensional",
            samples.dim(),
            grid.dim()
        )));
    }
    if let Some(w) = weights {
        if w.len() != samples.len() {
            return Err(Error::Diagnostic("one weight per sample required".into()));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Diagnostic("weights must be finite and >= 0".into()));
        }
    }
    let mut mass = vec![0.0; grid.bin_count()];
    let mut inside = 0.0;
    let mut total = 0.0;
    for (i, x) in samples.rows().enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        total += w;
        if let Some(k) = grid.locate(x) {
            mass[k] += w;
            inside += w;
        }
    }
    let volume = grid.bin_volume();
    if inside > 0.0 {
        for m in &mut mass {
            *m /= inside * volume;
        }
    }
    let out_of_range = if total > 0.0 {
        (total - inside) / total
    } else {
        0.0
    };
    Ok(HistogramGrid {
        grid: grid.clone(),
        values: mass,
        out_of_range,
    })
}

/// Relative L² distance between a histogram and reference bin masses:
/// `e² = Σ(∫_{R_i}π − v·B_i)² / Σ(∫_{R_i}π)²`.
pub fn relative_l2_error(hist: &HistogramGrid, reference: &BinnedDensity) -> Result<f64> {
    if hist.grid != reference.grid {
        return Err(Error::Diagnostic(
            "histogram and reference grids differ".into(),
        ));
    }
    let v = hist.grid.bin_volume();
    let (num, den) =
        hist.values
            .iter()
            .zip(&reference.integrals)
            .fold((0.0, 0.0), |(n, d), (b, r)| {
                let diff = r - v * b;
                (n + diff * diff, d + r * r)
            });
    if den == 0.0 {
        return Err(Error::Diagnostic(
            "reference has no mass on the grid".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Self-normalized estimate of `E[X^m]` for one coordinate.
pub fn weighted_moment(values: &[f64], weights: Option<&[f64]>, m: u32) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Diagnostic("no samples".into()));
    }
    let p = m as i32;
    match weights {
        None => Ok(values.iter().map(|x| x.powi(p)).sum::<f64>() / values.len() as f64),
        Some(w) => {
            if w.len() != values.len() {
                return Err(Error::Diagnostic("one weight per sample required".into()));
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Diagnostic("weights sum to zero".into()));
            }
            Ok(values
                .iter()
                .zip(w)
                .map(|(x, w)| w * x.powi(p))
                .sum::<f64>()
                / total)
        }
    }
}

/// `|Ê[X^m] − E[X^m]| / |E[X^m]|`. A zero reference moment is an error; use
/// [`absolute_moment_error`] for symmetric targets.
pub fn relative_moment_error(
    values: &[f64],
    weights: Option<&[f64]>,
    m: u32,
    reference: f64,
) -> Result<f64> {
    if !(1..=3).contains(&m) {
        return Err(Error::Diagnostic(format!("moment order {m} not in 1..=3")));
    }
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::Diagnostic(format!(
            "reference moment {m} is {reference}; use the absolute error"
        )));
    }
    let estimate = weighted_moment(values, weights, m)?;
    Ok(((estimate - reference) / reference).abs())
}

pub fn absolute_moment_error(
    values: &[f64],
    weights: Option<&[f64]>,
    m: u32,
    reference: f64,
) -> Result<f64> {
    Ok((weighted_moment(values, weights, m)? - reference).abs())
}

/// `∫ π log(π/π₀)` from quadrature weights and normalized log densities on
/// the quadrature nodes. Returns `+inf` when the prior vanishes where the
/// posterior does not.
pub fn kl_divergence(quadrature_weights: &[f64], log_posterior: &[f64], log_prior: &[f64]) -> f64 {
    assert_eq!(quadrature_weights.len(), log_posterior.len());
    assert_eq!(quadrature_weights.len(), log_prior.len());
    let mut kl = 0.0;
    for ((q, lp), l0) in quadrature_weights.iter().zip(log_posterior).zip(log_prior) {
        if *lp == f64::NEG_INFINITY {
            continue;
        }
        let p = lp.exp();
        if p == 0.0 {
            continue;
        }
        if *l0 == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        kl += q * p * (lp - l0);
    }
    kl
}
