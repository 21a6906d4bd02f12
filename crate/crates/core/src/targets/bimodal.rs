use super::quadrature::{bin_masses_1d, summarize_1d};
use super::{log_normal_pdf, positive_param, AnalyticReference, Bounds, Target};
use crate::diagnostics::GridSpec;
use crate::Result;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

/// Quadratic observation `D = x² + ε` with a Gaussian prior, giving a
/// posterior that is symmetric in `x` and bimodal once `D > σ²/(2τ²)`.
#[derive(Clone, Debug)]
pub struct BimodalTarget {
    tau2: f64,
    sigma2: f64,
    data: f64,
    reference: AnalyticReference,
}

const QUADRATURE_POINTS: usize = 4096;
const SIMPSON_PER_BIN: usize = 16;

impl BimodalTarget {
    pub fn default_grid() -> GridSpec {
        GridSpec::one_d(-3.0, 3.0, 240)
    }

    pub fn new(tau2: f64, sigma2: f64, data: f64) -> Result<Self> {
        Self::with_grid(tau2, sigma2, data, &Self::default_grid())
    }

    pub fn with_grid(tau2: f64, sigma2: f64, data: f64, grid: &GridSpec) -> Result<Self> {
        positive_param("tau2", tau2)?;
        positive_param("sigma2", sigma2)?;
        if !data.is_finite() {
            return Err(crate::Error::param("data", "must be finite"));
        }
        grid.validate()?;
        let unnormalized = move |x: f64| {
            let r = x * x - data;
            -r * r / (2.0 * sigma2) - x * x / (2.0 * tau2)
        };
        let (mode, curvature) = Self::laplace(tau2, sigma2, data);
        let half_width = (mode + 12.0 / curvature.sqrt()).max(12.0 * tau2.sqrt());
        let summary = summarize_1d(
            unnormalized,
            |x| log_normal_pdf(x, 0.0, tau2),
            -half_width,
            half_width,
            QUADRATURE_POINTS,
        );
        let mut density_grid =
            bin_masses_1d(unnormalized, summary.log_normalizer, grid, SIMPSON_PER_BIN);
        let axis = grid.axes[0];
        if axis.lo == -axis.hi {
            // Node placement is not bit-symmetric; average mirrored bins so
            // the evenness of the density carries over exactly.
            let g = &mut density_grid.integrals;
            let n = g.len();
            for k in 0..n / 2 {
                let avg = 0.5 * (g[k] + g[n - 1 - k]);
                g[k] = avg;
                g[n - 1 - k] = avg;
            }
        }
        // Odd moments vanish by symmetry.
        let moments = vec![[0.0, summary.moments[1], 0.0]];
        Ok(BimodalTarget {
            tau2,
            sigma2,
            data,
            reference: AnalyticReference {
                moments,
                density_grid,
                kl_prior: summary.kl_prior,
                log_normalizer: summary.log_normalizer,
            },
        })
    }

    /// Location of the positive mode (zero when unimodal) and the negative
    /// second derivative of `log π` there.
    pub fn laplace(tau2: f64, sigma2: f64, data: f64) -> (f64, f64) {
        let m2 = data - sigma2 / (2.0 * tau2);
        if m2 > 0.0 {
            let x = m2.sqrt();
            (x, (6.0 * x * x - 2.0 * data) / sigma2 + 1.0 / tau2)
        } else {
            (0.0, -2.0 * data / sigma2 + 1.0 / tau2)
        }
    }

    pub fn mode(&self) -> f64 {
        Self::laplace(self.tau2, self.sigma2, self.data).0
    }

    pub fn data(&self) -> f64 {
        self.data
    }
}

impl Target for BimodalTarget {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let r = x * x - self.data;
        -r * r / (2.0 * self.sigma2) - x * x / (2.0 * self.tau2)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let x = x[0];
        Some(vec![
            -2.0 * x * (x * x - self.data) / self.sigma2 - x / self.tau2,
        ])
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn support(&self) -> &[Bounds] {
        &[Bounds::REAL_LINE]
    }

    fn log_prior(&self, x: &[f64]) -> f64 {
        log_normal_pdf(x[0], 0.0, self.tau2)
    }

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let z: f64 = StandardNormal.sample(rng);
        vec![z * self.tau2.sqrt()]
    }

    fn reference(&self) -> Option<&AnalyticReference> {
        Some(&self.reference)
    }
}
