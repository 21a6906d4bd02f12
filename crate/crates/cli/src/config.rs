//! Experiment configuration.
//!
//! The canonical format is JSON, described by `config.schema.json` at the
//! crate root. Unknown keys are rejected and every error carries the path of
//! the offending field.

use crate::error::CliError;
use pais_core::engine::{
    AdaptationSpec, BurnInSpec, InitialSpec, KernelSpec, RunConfig, SamplerKind,
};
use pais_core::resamplers::{ResampleMode, ResamplerKind};
use pais_core::targets::{
    generate_data, BimodalTarget, ChemicalModel, ChemicalTarget, DataSpec, GaussianTarget, Target,
};
use pais_core::Execution;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub target: TargetSpec,
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
    /// Takes precedence over `--seed` and `PAIS_SEED`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default = "one")]
    pub repeats: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub bench: BenchSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

fn default_name() -> String {
    "experiment".into()
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Linear observation of a scalar with a Gaussian prior.
    Gaussian {
        #[serde(default = "gaussian_tau2")]
        tau2: f64,
        #[serde(default = "gaussian_sigma2")]
        sigma2: f64,
        #[serde(default = "gaussian_data")]
        data: f64,
    },
    /// Quadratic observation `D = x² + ε`.
    Bimodal {
        #[serde(default = "bimodal_tau2")]
        tau2: f64,
        #[serde(default = "bimodal_sigma2")]
        sigma2: f64,
        #[serde(default = "bimodal_data")]
        data: f64,
    },
    /// Two unknown rates `(k2, k3)` of the kinetics model.
    Chemical(ChemicalSpec),
}

fn gaussian_tau2() -> f64 {
    0.01
}
fn gaussian_sigma2() -> f64 {
    0.01
}
fn gaussian_data() -> f64 {
    4.0
}
fn bimodal_tau2() -> f64 {
    0.25
}
fn bimodal_sigma2() -> f64 {
    0.1
}
fn bimodal_data() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChemicalSpec {
    /// `(k1, k2, k3, k4)` used to generate data; `k1` and `k4` are also the
    /// known rates of the inference problem.
    pub rates: [f64; 4],
    pub times: Vec<f64>,
    pub sigma2: f64,
    pub alpha0: f64,
    pub beta0: f64,
    /// Observations; generated from `rates` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Vec<f64>>,
    /// CSV with columns `t,D`; overrides `data`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    /// Gamma noise on generated data.
    pub noisy: bool,
    pub data_seed: u64,
}

impl Default for ChemicalSpec {
    fn default() -> Self {
        ChemicalSpec {
            rates: [100.0, 50.0, 100.0, 1.0],
            times: ChemicalModel::standard_times(),
            sigma2: 225.0,
            alpha0: 56.25,
            beta0: 0.75,
            data: None,
            data_file: None,
            noisy: true,
            data_seed: 0,
        }
    }
}

impl ChemicalSpec {
    pub fn data_spec(&self) -> DataSpec {
        DataSpec::Chemical {
            rates: self.rates,
            times: self.times.clone(),
            variance: self.sigma2,
        }
    }

    fn observations(&self) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
        if let Some(path) = &self.data_file {
            return crate::output::read_chemical_data(path);
        }
        let data = match &self.data {
            Some(d) => d.clone(),
            None => generate_data(&self.data_spec(), self.noisy, self.data_seed)?,
        };
        Ok((self.times.clone(), data))
    }

    pub fn model(&self) -> anyhow::Result<ChemicalModel> {
        let (times, data) = self.observations()?;
        let model = ChemicalModel {
            k1: self.rates[0],
            k4: self.rates[3],
            sigma2: self.sigma2,
            obs_times: times,
            data,
            alpha0: self.alpha0,
            beta0: self.beta0,
        };
        model.validate()?;
        Ok(model)
    }
}

impl TargetSpec {
    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::Chemical(_) => 2,
            _ => 1,
        }
    }

    pub fn build(&self) -> anyhow::Result<Box<dyn Target>> {
        Ok(match self {
            TargetSpec::Gaussian { tau2, sigma2, data } => {
                Box::new(GaussianTarget::new(*tau2, *sigma2, *data)?)
            }
            TargetSpec::Bimodal { tau2, sigma2, data } => {
                Box::new(BimodalTarget::new(*tau2, *sigma2, *data)?)
            }
            TargetSpec::Chemical(c) => Box::new(ChemicalTarget::new(c.model()?)?),
        })
    }
}

/// `count` values of `β` evenly spaced in `ln β` over `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else if k == 0 {
                    self.lo
                } else {
                    (a + (b - a) * k as f64 / (self.count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSpec {
    pub sizes: Vec<usize>,
    pub repeats: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            sizes: vec![16, 32, 64, 128, 256, 512],
            repeats: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Write `weighted_samples.csv`.
    pub samples: bool,
    /// Write `diagnostics.csv`.
    pub diagnostics: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            samples: true,
            diagnostics: true,
        }
    }
}

impl ExperimentSpec {
    /// Minimal spec with every optional field at its default.
    pub fn new(
        target: TargetSpec,
        ensemble_size: usize,
        iterations: usize,
        kernel: KernelSpec,
    ) -> Self {
        ExperimentSpec {
            name: default_name(),
            target,
            sampler: SamplerKind::default(),
            ensemble_size,
            iterations,
            kernel,
            resampler: ResamplerKind::default(),
            resample_mode: ResampleMode::default(),
            adaptation: AdaptationSpec::default(),
            burn_in: BurnInSpec::default(),
            initial: InitialSpec::default(),
            seed: None,
            execution: Execution::default(),
            repeats: 1,
            sweep: None,
            bench: BenchSpec::default(),
            outputs: OutputSpec::default(),
        }
    }

    /// Engine configuration for one run with the given seed.
    pub fn run_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            sampler: self.sampler,
            ensemble_size: self.ensemble_size,
            iterations: self.iterations,
            kernel: self.kernel.clone(),
            resampler: self.resampler,
            resample_mode: self.resample_mode,
            adaptation: self.adaptation.clone(),
            burn_in: self.burn_in.clone(),
            initial: self.initial.clone(),
            seed,
            execution: self.execution,
        }
    }

    /// Config seed, then the command-line seed, then `PAIS_SEED`, then 0.
    pub fn resolve_seed(&self, flag: Option<u64>, env: Option<u64>) -> u64 {
        self.seed.or(flag).or(env).unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.repeats == 0 {
            return Err(CliError::schema("repeats", "must be >= 1"));
        }
        if let Some(s) = &self.sweep {
            if s.count < 2 {
                return Err(CliError::schema("sweep.count", "must be >= 2"));
            }
            if !(s.lo > 0.0 && s.hi >= s.lo && s.hi.is_finite()) {
                return Err(CliError::schema("sweep.lo", "need 0 < lo <= hi"));
            }
        }
        if self.bench.repeats == 0 {
            return Err(CliError::schema("bench.repeats", "must be >= 1"));
        }
        if self.bench.sizes.iter().any(|&m| m < 2) {
            return Err(CliError::schema("bench.sizes", "every size must be >= 2"));
        }
        self.run_config(0)
            .validate(self.target.dim())
            .map_err(|e| match e {
                pais_core::Error::InvalidParameter { name, reason } => {
                    CliError::schema(name, reason)
                }
                other => CliError::Schema {
                    path: String::new(),
                    reason: other.to_string(),
                },
            })
    }

    /// Stable hash of the canonical serialization, 16 hex digits.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&canonical)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

pub fn parse_str(text: &str) -> Result<ExperimentSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec =
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
            path: e.path().to_string(),
            reason: e.inner().to_string(),
        })?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_str(&text)
}
