use super::quadrature::{summarize_1d, Trapezoid};
use super::{log_normal_pdf, positive_param, AnalyticReference, Bounds, Target};
use crate::diagnostics::{BinnedDensity, GridSpec};
use crate::Result;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::erf;

/// Linear observation `D = x + ε` with a Gaussian prior:
/// `log π(x) = −(x − D)²/(2σ²) − x²/(2τ²)`.
#[derive(Clone, Debug)]
pub struct GaussianTarget {
    tau2: f64,
    sigma2: f64,
    data: f64,
    reference: AnalyticReference,
}

const QUADRATURE_POINTS: usize = 4096;

impl GaussianTarget {
    pub fn default_grid() -> GridSpec {
        GridSpec::one_d(0.0, 4.0, 200)
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
        let mut target = GaussianTarget {
            tau2,
            sigma2,
            data,
            reference: AnalyticReference {
                moments: Vec::new(),
                density_grid: BinnedDensity {
                    grid: grid.clone(),
                    integrals: Vec::new(),
                },
                kl_prior: 0.0,
                log_normalizer: 0.0,
            },
        };
        target.reference = target.build_reference(grid);
        Ok(target)
    }

    pub fn posterior_mean(&self) -> f64 {
        self.data * self.tau2 / (self.sigma2 + self.tau2)
    }

    pub fn posterior_variance(&self) -> f64 {
        self.sigma2 * self.tau2 / (self.sigma2 + self.tau2)
    }

    /// Closed-form `log ∫ exp(log_density)`.
    pub fn log_normalizer_exact(&self) -> f64 {
        0.5 * (2.0 * std::f64::consts::PI * self.posterior_variance()).ln()
            - self.data * self.data / (2.0 * (self.sigma2 + self.tau2))
    }

    /// Closed-form KL divergence of the posterior from the prior.
    pub fn kl_prior_exact(&self) -> f64 {
        let (m, v, v0) = (self.posterior_mean(), self.posterior_variance(), self.tau2);
        0.5 * (v / v0 + m * m / v0 - 1.0 + (v0 / v).ln())
    }

    pub fn data(&self) -> f64 {
        self.data
    }

    fn build_reference(&self, grid: &GridSpec) -> AnalyticReference {
        let m = self.posterior_mean();
        let v = self.posterior_variance();
        let sd = v.sqrt();
        let cdf = |x: f64| 0.5 * (1.0 + erf((x - m) / (sd * std::f64::consts::SQRT_2)));
        let axis = grid.axes[0];
        let integrals = (0..axis.bins)
            .map(|k| cdf(axis.edge(k + 1)) - cdf(axis.edge(k)))
            .collect();
        // The KL integral runs on the Laplace window, which is exact here.
        let summary = summarize_1d(
            |x| self.log_density(&[x]),
            |x| self.log_prior(&[x]),
            m - 12.0 * sd,
            m + 12.0 * sd,
            QUADRATURE_POINTS,
        );
        AnalyticReference {
            moments: vec![[m, m * m + v, m * m * m + 3.0 * m * v]],
            density_grid: BinnedDensity {
                grid: grid.clone(),
                integrals,
            },
            kl_prior: summary.kl_prior,
            log_normalizer: summary.log_normalizer,
        }
    }

    /// `log Z` by trapezoid quadrature on the Laplace window.
    pub fn log_normalizer_quadrature(&self) -> f64 {
        let (m, sd) = (self.posterior_mean(), self.posterior_variance().sqrt());
        let rule = Trapezoid::new(m - 12.0 * sd, m + 12.0 * sd, QUADRATURE_POINTS);
        let terms: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| self.log_density(&[*x]) + w.ln())
            .collect();
        crate::log_sum_exp(&terms)
    }
}

impl Target for GaussianTarget {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        let r = x - self.data;
        -r * r / (2.0 * self.sigma2) - x * x / (2.0 * self.tau2)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let x = x[0];
        Some(vec![-(x - self.data) / self.sigma2 - x / self.tau2])
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
