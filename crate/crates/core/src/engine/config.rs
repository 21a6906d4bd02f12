use crate::kernels::{KernelKind, ProposalKernel};
use crate::resamplers::{ResampleMode, Resampler, ResamplerKind};
use crate::{Error, Execution, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Pais,
    /// `M` independent Metropolis-Hastings chains.
    Mh,
}

/// Members with an inflated scale. They occupy the first `count` slots of
/// every group (one group, or two while adaptation runs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoutSpec {
    pub count: usize,
    #[serde(default = "default_scout_multiplier")]
    pub multiplier: f64,
}

fn default_scout_multiplier() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub beta: f64,
    /// Random-walk covariance `Σ` (rows); identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scouts: Option<ScoutSpec>,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, beta: f64) -> Self {
        KernelSpec {
            kind,
            beta,
            covariance: None,
            scouts: None,
        }
    }

    pub fn with_scouts(mut self, count: usize, multiplier: f64) -> Self {
        self.scouts = Some(ScoutSpec { count, multiplier });
        self
    }

    pub fn build(&self, dim: usize) -> Result<ProposalKernel> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::param(
                "kernel.beta",
                format!("must be > 0, got {}", self.beta),
            ));
        }
        match &self.covariance {
            None => ProposalKernel::new(self.kind, self.beta, dim),
            Some(rows) => {
                if self.kind != KernelKind::RwGaussian {
                    return Err(Error::param(
                        "kernel.covariance",
                        "only the rw_gaussian kernel takes a covariance",
                    ));
                }
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::param(
                        "kernel.covariance",
                        format!("must be {dim} x {dim}"),
                    ));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                ProposalKernel::rw_gaussian_with_covariance(
                    self.beta,
                    DMatrix::from_row_slice(dim, dim, &flat),
                )
            }
        }
    }
}

/// What the adaptation maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Objective {
    /// Mean per-iteration effective sample size (PAIS).
    Ess,
    /// `−|acceptance rate − target|` (Metropolis-Hastings).
    Acceptance { target: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptationSpec {
    pub enabled: bool,
    /// First epoch boundary.
    pub n0: usize,
    /// Epoch boundaries are `n0 · growth^k`.
    pub growth: f64,
    pub beta_lo: f64,
    pub beta_hi: f64,
    /// Stop once the bracket is narrower than this in `ln β`.
    pub resolution: f64,
    /// Multiplier applied to the converged `β`.
    pub inflation: f64,
    /// Defaults to ESS for PAIS and acceptance 0.5 for MH.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
}

impl Default for AdaptationSpec {
    fn default() -> Self {
        AdaptationSpec {
            enabled: false,
            n0: 50,
            growth: 1.5,
            beta_lo: 1e-5,
            beta_hi: 2.0,
            resolution: 0.1,
            inflation: 1.1,
            objective: None,
        }
    }
}

impl AdaptationSpec {
    pub fn enabled() -> Self {
        AdaptationSpec {
            enabled: true,
            ..Self::default()
        }
    }

    pub fn objective_for(&self, sampler: SamplerKind) -> Objective {
        self.objective.unwrap_or(match sampler {
            SamplerKind::Pais => Objective::Ess,
            SamplerKind::Mh => Objective::Acceptance { target: 0.5 },
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_lo > 0.0 && self.beta_hi > self.beta_lo && self.beta_hi.is_finite()) {
            return Err(Error::param(
                "adaptation.beta_lo",
                format!(
                    "need 0 < beta_lo < beta_hi, got [{}, {}]",
                    self.beta_lo, self.beta_hi
                ),
            ));
        }
        if self.n0 == 0 {
            return Err(Error::param("adaptation.n0", "must be >= 1"));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return Err(Error::param("adaptation.growth", "must be > 1"));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::param("adaptation.resolution", "must be > 0"));
        }
        if !(self.inflation >= 1.0 && self.inflation.is_finite()) {
            return Err(Error::param("adaptation.inflation", "must be >= 1"));
        }
        if let Some(Objective::Acceptance { target }) = self.objective {
            if !(target > 0.0 && target < 1.0) {
                return Err(Error::param(
                    "adaptation.objective.target",
                    "must be in (0, 1)",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BurnInSpec {
    pub window: usize,
    /// Plateau when `|slope| < slope_tolerance · scale` per iteration.
    pub slope_tolerance: f64,
    /// Required rise from the start, as a fraction of the scale.
    pub rise: f64,
}

impl Default for BurnInSpec {
    fn default() -> Self {
        BurnInSpec {
            window: 20,
            slope_tolerance: 0.01,
            rise: 0.1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum InitialSpec {
    /// Independent prior draws.
    #[default]
    Prior,
    /// Explicit states, one row per member.
    States { states: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub sampler: SamplerKind,
    /// `M`.
    pub ensemble_size: usize,
    /// `N`.
    pub iterations: usize,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub resampler: ResamplerKind,
    #[serde(default)]
    pub resample_mode: ResampleMode,
    #[serde(default)]
    pub adaptation: AdaptationSpec,
    #[serde(default)]
    pub burn_in: BurnInSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub execution: Execution,
}

impl RunConfig {
    pub fn new(
        sampler: SamplerKind,
        ensemble_size: usize,
        iterations: usize,
        kernel: KernelSpec,
    ) -> Self {
        RunConfig {
            sampler,
            ensemble_size,
            iterations,
            kernel,
            resampler: ResamplerKind::default(),
            resample_mode: ResampleMode::default(),
            adaptation: AdaptationSpec::default(),
            burn_in: BurnInSpec::default(),
            initial: InitialSpec::default(),
            seed: 0,
            execution: Execution::default(),
        }
    }

    pub fn resampler(&self) -> Resampler {
        Resampler::new(self.resampler, self.resample_mode)
    }

    /// Number of groups sharing one scale: two while adaptation runs.
    pub(crate) fn groups(&self) -> usize {
        if self.adaptation.enabled {
            2
        } else {
            1
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(Error::param("ensemble_size", "must be >= 1"));
        }
        self.kernel.build(dim)?;
        if let Some(s) = &self.kernel.scouts {
            if !(s.multiplier.is_finite() && s.multiplier > 0.0) {
                return Err(Error::param("kernel.scouts.multiplier", "must be > 0"));
            }
            let group = self.ensemble_size / self.groups();
            if s.count >= group {
                return Err(Error::param(
                    "kernel.scouts.count",
                    format!("must be below the group size {group}"),
                ));
            }
        }
        if self.adaptation.enabled {
            self.adaptation.validate()?;
            if self.ensemble_size < 2 {
                return Err(Error::param(
                    "adaptation.enabled",
                    "needs ensemble_size >= 2",
                ));
            }
            if self.sampler == SamplerKind::Pais
                && matches!(
                    self.adaptation.objective,
                    Some(Objective::Acceptance { .. })
                )
            {
                return Err(Error::param(
                    "adaptation.objective",
                    "PAIS has no acceptance rate; use ess",
                ));
            }
        }
        if self.burn_in.window < 2 {
            return Err(Error::param("burn_in.window", "must be >= 2"));
        }
        if let InitialSpec::States { states } = &self.initial {
            if states.len() != self.ensemble_size {
                return Err(Error::param(
                    "initial.states",
                    format!(
                        "{} states for ensemble_size {}",
                        states.len(),
                        self.ensemble_size
                    ),
                ));
            }
            if states
                .iter()
                .any(|s| s.len() != dim || s.iter().any(|v| !v.is_finite()))
            {
                return Err(Error::param(
                    "initial.states",
                    format!("every state needs {dim} finite coordinates"),
                ));
            }
        }
        Ok(())
    }
}
