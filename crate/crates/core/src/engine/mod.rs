//! Sampler drivers.
//!
//! [`run`] executes PAIS or the naively parallel Metropolis-Hastings
//! baseline according to a [`RunConfig`]. Optional golden-section adaptation
//! of the proposal scale runs the two halves of the ensemble, as separate
//! sub-ensembles, at the two interior points of a log-scale bracket and
//! narrows the bracket at epoch boundaries `n0 · g^k`. Burn-in is detected
//! after the run from a plateau of the ESS series (PAIS) or of the mean log
//! density (MH); the stream is kept whole and analysis starts after the
//! burn-in.

mod adapt;
mod burn_in;
mod config;
mod mh;
mod output;
mod pais;
mod schedule;

pub use adapt::{epoch_boundaries, AdaptationEvent, BetaAdapter};
pub use burn_in::{detect_burn_in, detect_plateau};
pub use config::{
    AdaptationSpec, BurnInSpec, InitialSpec, KernelSpec, Objective, RunConfig, SamplerKind,
    ScoutSpec,
};
pub use mh::{mh_accept, run_mh_with_sink};
pub use output::{MemorySink, NullSink, SampleSink, SamplerOutput, WeightedSamples};
pub use pais::{pais_step, run_pais_with_sink, StepResult};

use crate::targets::Target;
use crate::Result;

/// Runs the configured sampler, streaming into `sink`.
pub fn run_with_sink(
    target: &dyn Target,
    config: &RunConfig,
    sink: &mut dyn SampleSink,
) -> Result<SamplerOutput> {
    match config.sampler {
        SamplerKind::Pais => run_pais_with_sink(target, config, sink),
        SamplerKind::Mh => run_mh_with_sink(target, config, sink),
    }
}

/// Runs the configured sampler and keeps the weighted stream in memory.
pub fn run(target: &dyn Target, config: &RunConfig) -> Result<SamplerOutput> {
    let mut sink = MemorySink::new(target.dim(), config.ensemble_size);
    let mut out = run_with_sink(target, config, &mut sink)?;
    out.samples = Some(sink.samples);
    Ok(out)
}

/// [`run`] with the sampler forced to PAIS.
pub fn run_pais(target: &dyn Target, config: &RunConfig) -> Result<SamplerOutput> {
    let config = RunConfig {
        sampler: SamplerKind::Pais,
        ..config.clone()
    };
    run(target, &config)
}

/// [`run`] with the sampler forced to Metropolis-Hastings.
pub fn run_mh(target: &dyn Target, config: &RunConfig) -> Result<SamplerOutput> {
    let config = RunConfig {
        sampler: SamplerKind::Mh,
        ..config.clone()
    };
    run(target, &config)
}
