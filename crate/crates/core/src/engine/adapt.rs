//! Golden-section search for the proposal scale on a log scale.
//!
//! The ensemble is split in two halves that run at the two interior points
//! of the current bracket. While the search runs the halves are separate
//! sub-ensembles (own mixture, own resampling), so each half measures the
//! objective of an ensemble that uses its scale alone. Each epoch averages
//! the objective of both halves; at the next epoch boundary the worse outer
//! third of the bracket is discarded. Boundaries sit at `n0 · g^k`, so the
//! gaps between updates grow geometrically.

use super::config::AdaptationSpec;
use serde::Serialize;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Epoch boundaries `n_k ≈ n0 · g^k` below `limit`, with gaps forced to be
/// strictly increasing after rounding.
pub fn epoch_boundaries(n0: usize, growth: f64, limit: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = n0;
    let mut gap = 0usize;
    let mut k = 0i32;
    while n < limit {
        out.push(n);
        k += 1;
        let ideal = (n0 as f64 * growth.powi(k)).round() as usize;
        let next_gap = ideal.saturating_sub(n).max(gap + 1);
        gap = next_gap;
        n += next_gap;
    }
    out
}

/// One completed epoch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptationEvent {
    /// First iteration run with the updated scales.
    pub iteration: usize,
    pub beta_lower: f64,
    pub beta_upper: f64,
    /// Mean objective of the half at the lower interior point.
    pub objective_lower: f64,
    pub objective_upper: f64,
    /// Set when the bracket fell below the resolution.
    pub frozen: Option<f64>,
}

#[derive(Clone, Debug)]
enum Phase {
    Warmup,
    Searching,
    Frozen(f64),
}

/// Golden-section state for the scale of the local (non-scout) members.
#[derive(Clone, Debug)]
pub struct BetaAdapter {
    lo: f64,
    hi: f64,
    resolution: f64,
    inflation: f64,
    initial: f64,
    phase: Phase,
    sums: [f64; 2],
    count: usize,
}

impl BetaAdapter {
    pub fn new(spec: &AdaptationSpec, initial_beta: f64) -> Self {
        BetaAdapter {
            lo: spec.beta_lo.ln(),
            hi: spec.beta_hi.ln(),
            resolution: spec.resolution,
            inflation: spec.inflation,
            initial: initial_beta,
            phase: Phase::Warmup,
            sums: [0.0; 2],
            count: 0,
        }
    }

    /// Interior points `(c, d)` of the current bracket, as scales.
    pub fn interior(&self) -> (f64, f64) {
        let w = self.hi - self.lo;
        ((self.hi - INV_PHI * w).exp(), (self.lo + INV_PHI * w).exp())
    }

    /// Local scale of each of the two groups.
    pub fn group_betas(&self) -> [f64; 2] {
        match self.phase {
            Phase::Warmup => [self.initial; 2],
            Phase::Searching => {
                let (c, d) = self.interior();
                [c, d]
            }
            Phase::Frozen(b) => [b; 2],
        }
    }

    /// Single summary scale: the bracket's geometric center while
    /// searching.
    pub fn current(&self) -> f64 {
        match self.phase {
            Phase::Warmup => self.initial,
            Phase::Searching => (0.5 * (self.lo + self.hi)).exp(),
            Phase::Frozen(b) => b,
        }
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self.phase, Phase::Frozen(_))
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.lo.exp(), self.hi.exp())
    }

    /// Adds one iteration's objective for both groups. Ignored outside the
    /// search phase.
    pub fn observe(&mut self, lower: f64, upper: f64) {
        if let Phase::Searching = self.phase {
            self.sums[0] += lower;
            self.sums[1] += upper;
            self.count += 1;
        }
    }

    /// Called at an epoch boundary; `iteration` is the first iteration of
    /// the new epoch.
    pub fn end_epoch(&mut self, iteration: usize) -> Option<AdaptationEvent> {
        match self.phase {
            Phase::Frozen(_) => None,
            Phase::Warmup => {
                self.phase = Phase::Searching;
                None
            }
            Phase::Searching => {
                let n = self.count.max(1) as f64;
                let (fc, fd) = (self.sums[0] / n, self.sums[1] / n);
                self.sums = [0.0; 2];
                self.count = 0;
                Some(self.update(iteration, fc, fd))
            }
        }
    }

    /// One golden-section reduction with objective values at the interior
    /// points (larger is better). A tie keeps the middle third.
    pub fn update(&mut self, iteration: usize, fc: f64, fd: f64) -> AdaptationEvent {
        let w = self.hi - self.lo;
        let c = self.hi - INV_PHI * w;
        let d = self.lo + INV_PHI * w;
        if fc > fd {
            self.hi = d;
        } else if fd > fc {
            self.lo = c;
        } else {
            self.lo = c;
            self.hi = d;
        }
        let mut frozen = None;
        if self.hi - self.lo < self.resolution {
            let b = (0.5 * (self.lo + self.hi)).exp() * self.inflation;
            self.phase = Phase::Frozen(b);
            frozen = Some(b);
        } else {
            self.phase = Phase::Searching;
        }
        AdaptationEvent {
            iteration,
            beta_lower: c.exp(),
            beta_upper: d.exp(),
            objective_lower: fc,
            objective_upper: fd,
            frozen,
        }
    }
}
