//! Proposal kernels `ν(·; x)`, the ensemble mixture `χ(y) = (1/M) Σ ν_j(y)`
//! and importance weights `log π(y) − log χ(y)`.
//!
//! Members may carry different kernels (scout chains use a larger scale), so
//! the mixture is built from one [`Component`] per member. A component is the
//! kernel frozen at its center with all per-center constants precomputed.

use crate::targets::Target;
use crate::{log_sum_exp, Error, Execution, Points, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `y = x + β L ω` with `L Lᵀ = Σ`.
    RwGaussian,
    /// Independent Gamma per coordinate with mean `x` and standard deviation `β`.
    GammaMeanCentered,
    /// As above with mean `x + ½β² ∇log π(x)`.
    GammaLangevin,
}

impl KernelKind {
    /// Whether `ν(y; x) = ν(x; y)`.
    pub fn is_symmetric(self) -> bool {
        self == KernelKind::RwGaussian
    }
}

/// Lower Cholesky factor of the random-walk covariance.
#[derive(Debug)]
struct Factor {
    lower: DMatrix<f64>,
    log_det: f64,
}

#[derive(Clone, Debug)]
pub struct ProposalKernel {
    kind: KernelKind,
    beta: f64,
    dim: usize,
    /// `None` means the identity covariance.
    factor: Option<Arc<Factor>>,
}

impl ProposalKernel {
    pub fn new(kind: KernelKind, beta: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let kernel = ProposalKernel {
            kind,
            beta,
            dim,
            factor: None,
        };
        kernel.check_beta(beta)?;
        Ok(kernel)
    }

    /// Random-walk kernel with covariance `β² Σ`. `Σ` must be symmetric
    /// positive definite.
    pub fn rw_gaussian_with_covariance(beta: f64, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = covariance.nrows();
        let mut kernel = Self::new(KernelKind::RwGaussian, beta, dim)?;
        if covariance.ncols() != dim {
            return Err(Error::param("covariance", "must be square"));
        }
        let asym = (&covariance - covariance.transpose()).abs().max();
        if !(asym <= 1e-12 * covariance.abs().max()) {
            return Err(Error::param("covariance", "must be symmetric"));
        }
        let chol = covariance
            .cholesky()
            .ok_or_else(|| Error::param("covariance", "must be positive definite"))?;
        let lower = chol.l();
        let log_det = lower.diagonal().iter().map(|v| v.ln()).sum();
        kernel.factor = Some(Arc::new(Factor { lower, log_det }));
        Ok(kernel)
    }

    fn check_beta(&self, beta: f64) -> Result<()> {
        // A zero scale is a valid (degenerate) random walk; Gamma kernels
        // need a positive variance.
        let ok = match self.kind {
            KernelKind::RwGaussian => beta.is_finite() && beta >= 0.0,
            _ => beta.is_finite() && beta > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(
                "beta",
                format!("invalid scale {beta} for {:?}", self.kind),
            ))
        }
    }

    /// Same kernel with a different scale; the covariance factor is shared.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        self.check_beta(beta)?;
        Ok(ProposalKernel {
            beta,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Freezes the kernel at `center`.
    pub fn component(&self, center: &[f64], target: &dyn Target) -> Result<Component> {
        if center.len() != self.dim {
            return Err(Error::Proposal(format!(
                "center has {} coordinates, kernel expects {}",
                center.len(),
                self.dim
            )));
        }
        match self.kind {
            KernelKind::RwGaussian => {
                let whitened_center = whiten(self.factor.as_deref(), center);
                let d = self.dim as f64;
                let log_det = self.factor.as_ref().map_or(0.0, |f| f.log_det);
                let log_norm = -0.5 * d * (2.0 * PI).ln() - d * self.beta.ln() - log_det;
                Ok(Component {
                    center: center.to_vec(),
                    shape: ComponentShape::Gaussian {
                        whitened_center,
                        beta: self.beta,
                        log_norm,
                        factor: self.factor.clone(),
                    },
                    drift_fallbacks: 0,
                })
            }
            KernelKind::GammaMeanCentered | KernelKind::GammaLangevin => {
                if let Some(c) = center.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
                    return Err(Error::Proposal(format!(
                        "Gamma kernel needs a positive center, got {c}"
                    )));
                }
                let mut mean = center.to_vec();
                let mut drift_fallbacks = 0;
                if self.kind == KernelKind::GammaLangevin {
                    let grad = target.gradient(center).ok_or_else(|| {
                        Error::Proposal("Langevin kernel needs a target gradient".into())
                    })?;
                    for (m, g) in mean.iter_mut().zip(grad) {
                        let drifted = *m + 0.5 * self.beta * self.beta * g;
                        if drifted.is_finite() && drifted > 0.0 {
                            *m = drifted;
                        } else {
                            drift_fallbacks += 1;
                        }
                    }
                }
                Ok(Component::gamma(
                    center.to_vec(),
                    &mean,
                    self.beta,
                    drift_fallbacks,
                ))
            }
        }
    }
}

fn whiten(factor: Option<&Factor>, v: &[f64]) -> Vec<f64> {
    match factor {
        None => v.to_vec(),
        Some(f) => {
            let rhs = DVector::from_column_slice(v);
            f.lower
                .solve_lower_triangular(&rhs)
                .expect("Cholesky factor has a positive diagonal")
                .as_slice()
                .to_vec()
        }
    }
}

#[derive(Clone, Debug)]
enum ComponentShape {
    Gaussian {
        whitened_center: Vec<f64>,
        beta: f64,
        log_norm: f64,
        factor: Option<Arc<Factor>>,
    },
    Gamma {
        shapes: Vec<f64>,
        rates: Vec<f64>,
        /// `shape ln(rate) − lnΓ(shape)` per coordinate.
        log_norms: Vec<f64>,
    },
}

/// A kernel frozen at one center.
#[derive(Clone, Debug)]
pub struct Component {
    center: Vec<f64>,
    shape: ComponentShape,
    /// Coordinates where the Langevin mean left the support and the
    /// undrifted center was used instead.
    pub drift_fallbacks: usize,
}

impl Component {
    fn gamma(center: Vec<f64>, mean: &[f64], beta: f64, drift_fallbacks: usize) -> Self {
        let var = beta * beta;
        let shapes: Vec<f64> = mean.iter().map(|m| m * m / var).collect();
        let rates: Vec<f64> = mean.iter().map(|m| m / var).collect();
        let log_norms = shapes
            .iter()
            .zip(&rates)
            .map(|(a, b)| a * b.ln() - ln_gamma(*a))
            .collect();
        Component {
            center,
            shape: ComponentShape::Gamma {
                shapes,
                rates,
                log_norms,
            },
            drift_fallbacks,
        }
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Mean of the proposal distribution (the drifted mean for Langevin).
    pub fn mean(&self) -> Vec<f64> {
        match &self.shape {
            ComponentShape::Gaussian { .. } => self.center.clone(),
            ComponentShape::Gamma { shapes, rates, .. } => {
                shapes.iter().zip(rates).map(|(a, b)| a / b).collect()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.shape {
            ComponentShape::Gaussian { beta, factor, .. } => {
                let omega: Vec<f64> = (0..self.center.len())
                    .map(|_| StandardNormal.sample(rng))
                    .collect();
                let step = match factor {
                    None => omega,
                    Some(f) => (&f.lower * DVector::from_vec(omega)).as_slice().to_vec(),
                };
                self.center
                    .iter()
                    .zip(step)
                    .map(|(x, s)| x + beta * s)
                    .collect()
            }
            ComponentShape::Gamma { shapes, rates, .. } => shapes
                .iter()
                .zip(rates)
                .map(|(a, b)| {
                    Gamma::new(*a, 1.0 / b)
                        .expect("shape and rate are positive")
                        .sample(rng)
                })
                .collect(),
        }
    }

    pub fn log_density(&self, y: &[f64]) -> f64 {
        match &self.shape {
            ComponentShape::Gaussian { factor, .. } => {
                let wy = whiten(factor.as_deref(), y);
                self.gaussian_log_density(&wy)
            }
            ComponentShape::Gamma { .. } => {
                if y.iter().any(|v| !(*v > 0.0)) {
                    return f64::NEG_INFINITY;
                }
                let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
                self.gamma_log_density(y, &ln_y)
            }
        }
    }

    fn gaussian_log_density(&self, whitened_y: &[f64]) -> f64 {
        let ComponentShape::Gaussian {
            whitened_center,
            beta,
            log_norm,
            ..
        } = &self.shape
        else {
            unreachable!()
        };
        let r2: f64 = whitened_y
            .iter()
            .zip(whitened_center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if *beta == 0.0 {
            return if r2 == 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
        }
        log_norm - 0.5 * r2 / (beta * beta)
    }

    fn gamma_log_density(&self, y: &[f64], ln_y: &[f64]) -> f64 {
        let ComponentShape::Gamma {
            shapes,
            rates,
            log_norms,
        } = &self.shape
        else {
            unreachable!()
        };
        let mut total = 0.0;
        for c in 0..y.len() {
            total += log_norms[c] + (shapes[c] - 1.0) * ln_y[c] - rates[c] * y[c];
        }
        total
    }
}

/// `log ν(y; center)` for a single kernel.
pub fn log_kernel_density(
    kernel: &ProposalKernel,
    y: &[f64],
    center: &[f64],
    target: &dyn Target,
) -> Result<f64> {
    Ok(kernel.component(center, target)?.log_density(y))
}

/// Draws `y ~ ν(·; center)`.
pub fn sample_kernel<R: Rng + ?Sized>(
    kernel: &ProposalKernel,
    center: &[f64],
    target: &dyn Target,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(kernel.component(center, target)?.sample(rng))
}

/// `log χ(y) = log((1/M) Σ_j ν_j(y))` over all components.
pub fn mixture_log_density(components: &[Component], y: &[f64]) -> f64 {
    if components.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mut ln_y: Option<Vec<f64>> = None;
    let mut whitened: Option<(*const Factor, Vec<f64>)> = None;
    let terms: Vec<f64> = components
        .iter()
        .map(|c| match &c.shape {
            ComponentShape::Gaussian { factor, .. } => match factor {
                None => c.gaussian_log_density(y),
                Some(f) => {
                    let key = Arc::as_ptr(f);
                    if whitened.as_ref().is_none_or(|(k, _)| *k != key) {
                        whitened = Some((key, whiten(Some(f), y)));
                    }
                    c.gaussian_log_density(&whitened.as_ref().expect("just set").1)
                }
            },
            ComponentShape::Gamma { .. } => {
                if y.iter().any(|v| !(*v > 0.0)) {
                    return f64::NEG_INFINITY;
                }
                let ln_y = ln_y.get_or_insert_with(|| y.iter().map(|v| v.ln()).collect());
                c.gamma_log_density(y, ln_y)
            }
        })
        .collect();
    log_sum_exp(&terms) - (components.len() as f64).ln()
}

/// `log w_j = log π(y_j) − log χ(y_j)`, unnormalized. Proposals outside the
/// target support get `-inf`.
pub fn compute_weights(
    target: &dyn Target,
    proposals: &Points,
    components: &[Component],
    exec: Execution,
) -> Vec<f64> {
    exec.map(proposals.len(), |j| {
        let y = proposals.row(j);
        let log_pi = target.log_density(y);
        if log_pi == f64::NEG_INFINITY || log_pi.is_nan() {
            return f64::NEG_INFINITY;
        }
        let log_chi = mixture_log_density(components, y);
        if log_chi == f64::NEG_INFINITY {
            // Cannot happen for proposals drawn from the mixture.
            return f64::NEG_INFINITY;
        }
        log_pi - log_chi
    })
}

/// A set of weighted states.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub states: Points,
    /// Unnormalized log weights, one per state.
    pub log_weights: Vec<f64>,
    pub iteration: usize,
}

impl Ensemble {
    pub fn uniform(states: Points, iteration: usize) -> Self {
        let log_weights = vec![0.0; states.len()];
        Ensemble {
            states,
            log_weights,
            iteration,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        crate::diagnostics::normalized_weights(&self.log_weights)
    }
}
