//! Resampling a weighted ensemble to an evenly weighted one.
//!
//! * ETPF: the optimal-transport coupling between the weighted proposals and
//!   the uniform measure on the same points; the new states are the coupling
//!   means (or one draw per column in stochastic mode). Cubic in `M`.
//! * AMR: the weights are split into `M` unit-mass sub-multinomials built
//!   around the heaviest states; the new states are their means (or one draw
//!   each). Quadratic in `M`.
//! * Bootstrap: `M` independent multinomial draws.
//!
//! All resamplers take unnormalized log weights and keep zero-weight states in
//! the problem so that indices are stable.

mod amr;
mod transport;

pub use amr::{amr_split, SubMultinomials};
pub use transport::{solve_transport, CouplingPlan};

use crate::diagnostics::normalized_weights;
use crate::{Error, Points, Result};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResamplerKind {
    #[default]
    Etpf,
    Amr,
    Bootstrap,
}

/// Whether ETPF and AMR output coupling means or draws. Bootstrap always
/// draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    #[default]
    Deterministic,
    Stochastic,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resampler {
    pub kind: ResamplerKind,
    pub mode: ResampleMode,
}

impl Resampler {
    pub fn new(kind: ResamplerKind, mode: ResampleMode) -> Self {
        Resampler { kind, mode }
    }

    pub fn resample<R: Rng + ?Sized>(
        &self,
        points: &Points,
        log_weights: &[f64],
        rng: &mut R,
    ) -> Result<Points> {
        match self.kind {
            ResamplerKind::Etpf => etpf_resample(points, log_weights, self.mode, rng),
            ResamplerKind::Amr => amr_resample(points, log_weights, self.mode, rng),
            ResamplerKind::Bootstrap => bootstrap_resample(points, log_weights, rng),
        }
    }
}

fn weights_for(points: &Points, log_weights: &[f64]) -> Result<Vec<f64>> {
    if log_weights.len() != points.len() {
        return Err(Error::Resample(format!(
            "{} weights for {} points",
            log_weights.len(),
            points.len()
        )));
    }
    normalized_weights(log_weights).map_err(|e| Error::Resample(e.to_string()))
}

fn draw_index<R: Rng + ?Sized>(probabilities: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    WeightedIndex::new(probabilities)
        .expect("sub-distribution has positive mass")
        .sample(rng)
}

/// ETPF resampling with squared Euclidean transport cost.
pub fn etpf_resample<R: Rng + ?Sized>(
    points: &Points,
    log_weights: &[f64],
    mode: ResampleMode,
    rng: &mut R,
) -> Result<Points> {
    let w = weights_for(points, log_weights)?;
    let plan = solve_transport(&w, points)?;
    match mode {
        ResampleMode::Deterministic => Ok(plan.transform(points)),
        ResampleMode::Stochastic => {
            let m = points.len();
            let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
            for &(i, j, t) in plan.entries() {
                columns[j].push((i, t));
            }
            let mut out = Points::with_capacity(points.dim(), m);
            for col in &columns {
                let k = draw_index(col.iter().map(|c| c.1), rng);
                out.push(points.row(col[k].0));
            }
            Ok(out)
        }
    }
}

pub fn amr_resample<R: Rng + ?Sized>(
    points: &Points,
    log_weights: &[f64],
    mode: ResampleMode,
    rng: &mut R,
) -> Result<Points> {
    let w = weights_for(points, log_weights)?;
    let split = amr_split(&w, points)?;
    match mode {
        ResampleMode::Deterministic => Ok(split.means(points)),
        ResampleMode::Stochastic => {
            let mut out = Points::with_capacity(points.dim(), points.len());
            for row in &split.rows {
                let k = draw_index(row.iter().map(|c| c.1), rng);
                out.push(points.row(row[k].0));
            }
            Ok(out)
        }
    }
}

/// `M` draws with replacement, probabilities proportional to the weights.
pub fn bootstrap_resample<R: Rng + ?Sized>(
    points: &Points,
    log_weights: &[f64],
    rng: &mut R,
) -> Result<Points> {
    let w = weights_for(points, log_weights)?;
    let dist = WeightedIndex::new(&w).map_err(|e| Error::Resample(e.to_string()))?;
    let mut out = Points::with_capacity(points.dim(), points.len());
    for _ in 0..points.len() {
        out.push(points.row(dist.sample(rng)));
    }
    Ok(out)
}
