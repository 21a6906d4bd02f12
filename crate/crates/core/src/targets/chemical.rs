use super::quadrature::summarize_2d;
use super::{log_gamma_pdf, positive_param, AnalyticReference, Bounds, Target};
use crate::diagnostics::GridSpec;
use crate::{Error, Result};
use rand::RngCore;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{digamma, ln_gamma};
use std::sync::OnceLock;

/// Known rates, observations and prior of the two-parameter kinetics problem.
/// The unknowns are `k = (k2, k3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChemicalModel {
    pub k1: f64,
    pub k4: f64,
    /// Observation variance.
    pub sigma2: f64,
    pub obs_times: Vec<f64>,
    pub data: Vec<f64>,
    /// Shape of the Gamma prior on each of `k2`, `k3`.
    pub alpha0: f64,
    /// Rate of the Gamma prior.
    pub beta0: f64,
}

impl ChemicalModel {
    /// `k1 = 100`, `k4 = 1`, observation variance 225 and a Gamma prior with
    /// mean 75 and variance 100 on both unknown rates.
    pub fn standard(obs_times: Vec<f64>, data: Vec<f64>) -> Result<Self> {
        let model = ChemicalModel {
            k1: 100.0,
            k4: 1.0,
            sigma2: 225.0,
            obs_times,
            data,
            alpha0: 56.25,
            beta0: 0.75,
        };
        model.validate()?;
        Ok(model)
    }

    /// Observation times `2, 4, ..., 20`.
    pub fn standard_times() -> Vec<f64> {
        (1..=10).map(|i| 2.0 * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        positive_param("k1", self.k1)?;
        positive_param("k4", self.k4)?;
        positive_param("sigma2", self.sigma2)?;
        positive_param("alpha0", self.alpha0)?;
        positive_param("beta0", self.beta0)?;
        if self.obs_times.is_empty() {
            return Err(Error::param(
                "obs_times",
                "at least one observation required",
            ));
        }
        if self.obs_times.len() != self.data.len() {
            return Err(Error::param(
                "data",
                format!(
                    "{} observations for {} times",
                    self.data.len(),
                    self.obs_times.len()
                ),
            ));
        }
        if self.obs_times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::param("obs_times", "times must be finite and > 0"));
        }
        if self.obs_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "obs_times",
                "times must be strictly increasing",
            ));
        }
        if self.data.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::param("data", "observations must be finite and > 0"));
        }
        Ok(())
    }
}

/// Effective degradation rate `k2 k4 / (k2 + k3)` of the reduced model.
pub(crate) fn reduced_rate(k2: f64, k3: f64, k4: f64) -> f64 {
    k2 * k4 / (k2 + k3)
}

fn qssa_unchecked(kappa: f64, k1: f64, t: f64) -> f64 {
    // -expm1 keeps precision for small κt.
    (k1 / kappa) * -(-kappa * t).exp_m1()
}

/// Total population `S(t)` of the reduced model
/// `dS/dt = k1 − κ S`, `S(0) = 0`, with `κ = k2 k4 / (k2 + k3)`.
pub fn qssa_trajectory(k: (f64, f64), k1: f64, k4: f64, t: f64) -> Result<f64> {
    positive_param("k2", k.0)?;
    positive_param("k3", k.1)?;
    positive_param("k1", k1)?;
    positive_param("k4", k4)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    Ok(qssa_unchecked(reduced_rate(k.0, k.1, k4), k1, t))
}

const MAX_HALVINGS: usize = 8;
const ODE_TOLERANCE: f64 = 1e-8;

fn rk4_path(k: [f64; 4], times: &[f64], h: f64) -> Vec<(f64, f64)> {
    let [k1, k2, k3, k4] = k;
    let f = |x1: f64, x2: f64| (k1 - k2 * x1 + k3 * x2, k2 * x1 - (k3 + k4) * x2);
    let (mut x1, mut x2, mut now) = (0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / h).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                let (a1, a2) = f(x1, x2);
                let (b1, b2) = f(x1 + 0.5 * dt * a1, x2 + 0.5 * dt * a2);
                let (c1, c2) = f(x1 + 0.5 * dt * b1, x2 + 0.5 * dt * b2);
                let (d1, d2) = f(x1 + dt * c1, x2 + dt * c2);
                x1 += dt / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
                x2 += dt / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
            }
            now = t;
        }
        out.push((x1, x2));
    }
    out
}

/// Populations `(X1, X2)` of the full linear system
/// `X1' = k1 − k2 X1 + k3 X2`, `X2' = k2 X1 − (k3 + k4) X2` from zero initial
/// state, by fixed-step RK4. The step is halved until a further halving moves
/// every output by less than `1e-8` relative.
pub fn full_system_trajectory(k: [f64; 4], times: &[f64]) -> Result<Vec<(f64, f64)>> {
    for (name, v) in ["k1", "k2", "k3", "k4"].into_iter().zip(k) {
        positive_param(name, v)?;
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::param("times", "times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "times must be nondecreasing"));
    }
    let mut h = (1e-3f64).min(0.5 / (k[1] + k[2] + k[3]));
    let mut coarse = rk4_path(k, times, h);
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        let fine = rk4_path(k, times, h);
        let converged = coarse.iter().zip(&fine).all(|(a, b)| {
            let close = |p: f64, q: f64| (p - q).abs() <= ODE_TOLERANCE * p.abs().max(q.abs());
            close(a.0, b.0) && close(a.1, b.1)
        });
        if converged {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Integration(format!(
        "no agreement to {ODE_TOLERANCE:e} after {MAX_HALVINGS} step halvings (h = {h:e})"
    )))
}

/// Posterior over `(k2, k3)` with Gamma observation noise around the QSSA
/// prediction and independent Gamma priors.
#[derive(Debug)]
pub struct ChemicalTarget {
    model: ChemicalModel,
    grid: GridSpec,
    log_data: Vec<f64>,
    reference: OnceLock<AnalyticReference>,
}

const SIMPSON_PER_BIN: usize = 16;

impl ChemicalTarget {
    pub fn default_grid() -> GridSpec {
        GridSpec::two_d((0.0, 400.0, 100), (0.0, 400.0, 100))
    }

    pub fn new(model: ChemicalModel) -> Result<Self> {
        Self::with_grid(model, Self::default_grid())
    }

    pub fn with_grid(model: ChemicalModel, grid: GridSpec) -> Result<Self> {
        model.validate()?;
        grid.validate()?;
        if grid.dim() != 2 {
            return Err(Error::param("grid", "chemical target needs a 2-D grid"));
        }
        let log_data = model.data.iter().map(|d| d.ln()).collect();
        Ok(ChemicalTarget {
            model,
            grid,
            log_data,
            reference: OnceLock::new(),
        })
    }

    pub fn model(&self) -> &ChemicalModel {
        &self.model
    }

    /// The Gamma observation log likelihood alone.
    pub fn log_likelihood(&self, k2: f64, k3: f64) -> f64 {
        if !(k2 > 0.0 && k3 > 0.0 && k2.is_finite() && k3.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let m = &self.model;
        let kappa = reduced_rate(k2, k3, m.k4);
        let mut total = 0.0;
        for ((t, d), ln_d) in m.obs_times.iter().zip(&m.data).zip(&self.log_data) {
            let g = qssa_unchecked(kappa, m.k1, *t);
            let shape = g * g / m.sigma2;
            let rate = g / m.sigma2;
            total += shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * ln_d - rate * d;
        }
        total
    }

    fn compute_reference(&self) -> AnalyticReference {
        let r = summarize_2d(
            |x| self.log_density(x),
            |x| self.log_prior(x),
            &self.grid,
            SIMPSON_PER_BIN,
        );
        AnalyticReference {
            moments: r.moments,
            density_grid: r.density_grid,
            kl_prior: r.kl_prior,
            log_normalizer: r.log_normalizer,
        }
    }
}

impl Target for ChemicalTarget {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let like = self.log_likelihood(x[0], x[1]);
        if like == f64::NEG_INFINITY {
            return like;
        }
        like + self.log_prior(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (k2, k3) = (x[0], x[1]);
        if !(k2 > 0.0 && k3 > 0.0) {
            return Some(vec![f64::NAN; 2]);
        }
        let m = &self.model;
        let kappa = reduced_rate(k2, k3, m.k4);
        let s = m.sigma2;
        let mut dl_dkappa = 0.0;
        for ((t, d), ln_d) in m.obs_times.iter().zip(&m.data).zip(&self.log_data) {
            let decay = (-kappa * t).exp();
            let g = qssa_unchecked(kappa, m.k1, *t);
            let shape = g * g / s;
            let dl_dg = (2.0 * g / s) * ((g / s).ln() - digamma(shape) + ln_d) + (g - d) / s;
            let dg_dkappa =
                -(m.k1 / (kappa * kappa)) * -(-kappa * t).exp_m1() + (m.k1 / kappa) * t * decay;
            dl_dkappa += dl_dg * dg_dkappa;
        }
        let denom = (k2 + k3) * (k2 + k3);
        let dkappa_dk2 = m.k4 * k3 / denom;
        let dkappa_dk3 = -k2 * m.k4 / denom;
        let prior = |k: f64| (m.alpha0 - 1.0) / k - m.beta0;
        Some(vec![
            dl_dkappa * dkappa_dk2 + prior(k2),
            dl_dkappa * dkappa_dk3 + prior(k3),
        ])
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn support(&self) -> &[Bounds] {
        &[Bounds::POSITIVE, Bounds::POSITIVE]
    }

    fn log_prior(&self, x: &[f64]) -> f64 {
        let m = &self.model;
        log_gamma_pdf(x[0], m.alpha0, m.beta0) + log_gamma_pdf(x[1], m.alpha0, m.beta0)
    }

    fn sample_prior(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let prior = Gamma::new(self.model.alpha0, 1.0 / self.model.beta0)
            .expect("prior parameters validated at construction");
        vec![prior.sample(rng), prior.sample(rng)]
    }

    /// Built on first use by Simpson quadrature on a refinement of the
    /// default grid (about 2.6 million density evaluations).
    fn reference(&self) -> Option<&AnalyticReference> {
        Some(self.reference.get_or_init(|| self.compute_reference()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ChemicalModel {
        let times = ChemicalModel::standard_times();
        let data = times
            .iter()
            .map(|t| qssa_trajectory((50.0, 100.0), 100.0, 1.0, *t).unwrap())
            .collect();
        ChemicalModel::standard(times, data).unwrap()
    }

    #[test]
    fn qssa_values() {
        let s = qssa_trajectory((50.0, 100.0), 100.0, 1.0, 1e6).unwrap();
        assert!((s - 300.0).abs() < 1e-9);
        let s = qssa_trajectory((50.0, 100.0), 100.0, 1.0, 2.0).unwrap();
        let exact = 300.0 * (1.0 - (-2.0f64 / 3.0).exp());
        assert!((s - exact).abs() < 1e-12);
        assert!((s - 145.97).abs() < 0.01);
        assert_eq!(reduced_rate(7.0, 7.0, 3.0), 1.5);
        assert!(qssa_trajectory((0.0, 1.0), 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn full_system_initial_state_and_steady_state() {
        let out = full_system_trajectory([100.0, 50.0, 100.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(out, vec![(0.0, 0.0), (0.0, 0.0)]);
        // Steady state: X2 = k1/k4, X1 = (k3 + k4) X2 / k2.
        let out = full_system_trajectory([100.0, 50.0, 100.0, 1.0], &[60.0]).unwrap();
        let (x1, x2) = out[0];
        assert!((x2 - 100.0).abs() < 1e-6, "{x2}");
        assert!((x1 - 202.0).abs() < 1e-6, "{x1}");
    }

    #[test]
    fn qssa_agrees_with_full_system_when_fast_rates_dominate() {
        let times: Vec<f64> = (1..=10).map(|i| 2.0 * i as f64).collect();
        let full = full_system_trajectory([100.0, 5000.0, 10000.0, 1.0], &times).unwrap();
        for (t, (x1, x2)) in times.iter().zip(full) {
            let s = qssa_trajectory((5000.0, 10000.0), 100.0, 1.0, *t).unwrap();
            assert!(((x1 + x2) - s).abs() < 0.01 * s, "t={t}");
        }
    }

    #[test]
    fn gamma_mean_identity() {
        // shape/rate = G for the observation model.
        let g: f64 = 123.4;
        let s = 225.0;
        assert!(((g * g / s) / (g / s) - g).abs() < 1e-12);
    }

    #[test]
    fn out_of_support_is_neg_infinity() {
        let t = ChemicalTarget::new(model()).unwrap();
        assert_eq!(t.log_density(&[-1.0, 50.0]), f64::NEG_INFINITY);
        assert_eq!(t.log_density(&[50.0, 0.0]), f64::NEG_INFINITY);
        assert!(t.log_density(&[50.0, 100.0]).is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = ChemicalTarget::new(model()).unwrap();
        for x in [[50.0, 100.0], [30.0, 80.0], [120.0, 60.0]] {
            let g = t.gradient(&x).unwrap();
            for c in 0..2 {
                let h = 1e-5 * x[c];
                let mut p = x;
                let mut q = x;
                p[c] += h;
                q[c] -= h;
                let fd = (t.log_density(&p) - t.log_density(&q)) / (2.0 * h);
                assert!((g[c] - fd).abs() < 1e-5 * fd.abs().max(1.0), "{x:?} {c}");
            }
        }
    }

    #[test]
    fn rejects_bad_models() {
        let mut m = model();
        m.obs_times[3] = m.obs_times[2];
        assert!(m.validate().is_err());
        let mut m = model();
        m.data[0] = 0.0;
        assert!(m.validate().is_err());
        let mut m = model();
        m.data.pop();
        assert!(m.validate().is_err());
    }
}
