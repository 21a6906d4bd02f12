//! Target posteriors.
//!
//! A [`Target`] is an unnormalized log density on `R^d` with an optional
//! gradient, per-coordinate support bounds and the prior it was built from.
//! Implementations are pure and `Sync`: the engine evaluates them from many
//! workers at once.

mod bimodal;
mod chemical;
mod data;
mod gaussian;
mod quadrature;

pub use bimodal::BimodalTarget;
pub use chemical::{full_system_trajectory, qssa_trajectory, ChemicalModel, ChemicalTarget};
pub use data::{generate_data, DataSpec};
pub use gaussian::GaussianTarget;

use crate::diagnostics::BinnedDensity;
use rand::RngCore;

/// Open interval `(lower, upper)` for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const REAL_LINE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };
    pub const POSITIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x > self.lower && x < self.upper
    }
}

/// Reference statistics of a posterior computed by quadrature (or in closed
/// form where one exists).
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticReference {
    /// Raw moments `E[X_c], E[X_c²], E[X_c³]` per coordinate.
    pub moments: Vec<[f64; 3]>,
    /// Posterior mass of every bin of the default histogram grid.
    pub density_grid: BinnedDensity,
    /// `KL(posterior ‖ prior)` in nats.
    pub kl_prior: f64,
    /// `log ∫ exp(log_density)`, the normalizer of [`Target::log_density`].
    pub log_normalizer: f64,
}

pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    /// Unnormalized `log π(x)`; `-inf` outside the support.
    fn log_density(&self, x: &[f64]) -> f64;

    /// `∇ log π(x)` when the target provides one.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_gradient(&self) -> bool {
        false
    }

    fn support(&self) -> &[Bounds];

    fn in_support(&self, x: &[f64]) -> bool {
        x.iter().zip(self.support()).all(|(v, b)| b.contains(*v))
    }

    /// Normalized log prior density.
    fn log_prior(&self, x: &[f64]) -> f64;

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn reference(&self) -> Option<&AnalyticReference> {
        None
    }
}

/// `log Gamma(x; shape, rate)`; `-inf` for `x <= 0`.
pub fn log_gamma_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if !(x > 0.0) || x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - statrs::function::gamma::ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

pub(crate) fn log_normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * std::f64::consts::PI * variance).ln() - d * d / (2.0 * variance)
}

pub(crate) fn positive_param(name: &'static str, value: f64) -> crate::Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::param(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}
