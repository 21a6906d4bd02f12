//! Parallel adaptive importance sampling (PAIS) for low-dimensional Bayesian
//! inverse problems.
//!
//! An ensemble of `M` chain states defines a mixture proposal. Every iteration
//! draws one proposal per member, weights each proposal by the ratio of the
//! target density to the full mixture density, and resamples the weighted
//! proposals back to an evenly weighted ensemble. The weighted proposals are
//! the sampler output.
//!
//! Crate layout:
//!
//! * [`targets`]: posterior densities and the benchmark problems (Gaussian,
//!   bimodal, chemical kinetics with a QSSA forward model).
//! * [`kernels`]: proposal kernels, the ensemble mixture density and
//!   importance weights.
//! * [`resamplers`]: optimal-transport (ETPF), approximate multinomial (AMR)
//!   and bootstrap resampling.
//! * [`engine`]: the PAIS iteration, naively parallel Metropolis-Hastings
//!   baselines, scale adaptation and burn-in detection.
//! * [`diagnostics`]: effective sample size, weight variance, histograms and
//!   error statistics.
//!
//! The member-wise work inside an iteration runs on rayon when the `parallel`
//! feature is enabled (the default). Every random draw comes from a stream
//! addressed by `(seed, purpose, iteration, member)`, so results are
//! bit-identical for any thread count and for the sequential fallback.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::single_range_in_vec_init)]

pub mod diagnostics;
pub mod engine;
mod error;
pub mod exec;
pub mod kernels;
mod points;
pub mod resamplers;
pub mod rng;
pub mod targets;

pub use error::{Error, Result};
pub use exec::Execution;
pub use points::Points;

/// `log(Σ exp(v))` with a max shift. Returns `-inf` for an empty slice or when
/// every entry is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
