use super::burn_in::detect_burn_in;
use super::config::RunConfig;
use super::output::{SampleSink, SamplerOutput};
use super::schedule::ScaleSchedule;
use crate::diagnostics::{ess, normalized_weights, weight_variance, DiagnosticsRecord};
use crate::kernels::{mixture_log_density, ProposalKernel};
use crate::resamplers::Resampler;
use crate::rng::{stream, Purpose};
use crate::targets::Target;
use crate::{Error, Execution, Points, Result};
use std::ops::Range;

/// Everything one PAIS iteration produces.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// `Y`: one proposal per member.
    pub proposals: Points,
    /// `log w_j = log π(y_j) − log χ(y_j)`.
    pub log_weights: Vec<f64>,
    /// `log π(y_j)`.
    pub log_density: Vec<f64>,
    /// Evenly weighted ensemble for the next iteration.
    pub next: Points,
    pub ess: f64,
    pub weight_variance: f64,
    pub drift_fallbacks: usize,
}

/// One iteration: propose from every member's kernel, weight against the
/// full mixture, resample. Member `j` draws from the stream
/// `(seed, iteration, j)`; the resampler draws from `(seed, iteration)`.
pub fn pais_step(
    target: &dyn Target,
    states: &Points,
    kernels: &[ProposalKernel],
    resampler: Resampler,
    seed: u64,
    iteration: usize,
    exec: Execution,
) -> Result<StepResult> {
    let groups = [0..states.len()];
    grouped_step(
        target, states, kernels, &groups, resampler, seed, iteration, exec,
    )
}

/// [`pais_step`] for independent sub-ensembles: each group weights its
/// proposals against its own mixture and is resampled on its own. Group `g`
/// resamples from the stream `(seed, iteration, g)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn grouped_step(
    target: &dyn Target,
    states: &Points,
    kernels: &[ProposalKernel],
    groups: &[Range<usize>],
    resampler: Resampler,
    seed: u64,
    iteration: usize,
    exec: Execution,
) -> Result<StepResult> {
    let m = states.len();
    if m == 0 || kernels.len() != m {
        return Err(Error::param(
            "kernels",
            "one kernel per ensemble member required",
        ));
    }
    let components = exec.try_map(m, |j| kernels[j].component(states.row(j), target))?;
    let drift_fallbacks = components.iter().map(|c| c.drift_fallbacks).sum();
    let rows = exec.map(m, |j| {
        let mut rng = stream(seed, Purpose::Propose, iteration as u64, j as u64);
        components[j].sample(&mut rng)
    });
    let proposals = Points::from_rows(states.dim(), &rows);
    let group_of = |j: usize| {
        groups
            .iter()
            .find(|g| g.contains(&j))
            .expect("groups cover the ensemble")
            .clone()
    };
    let evaluated = exec.map(m, |j| {
        let y = proposals.row(j);
        let log_pi = target.log_density(y);
        if !(log_pi > f64::NEG_INFINITY) {
            return (f64::NEG_INFINITY, f64::NEG_INFINITY);
        }
        (
            log_pi,
            log_pi - mixture_log_density(&components[group_of(j)], y),
        )
    });
    let (log_density, log_weights): (Vec<f64>, Vec<f64>) = evaluated.into_iter().unzip();
    let mut next = Points::with_capacity(states.dim(), m);
    for (g, range) in groups.iter().enumerate() {
        let lw = &log_weights[range.clone()];
        if lw.iter().all(|w| *w == f64::NEG_INFINITY) {
            return Err(Error::Proposal("every proposal has zero weight".into()));
        }
        let mut part = Points::with_capacity(states.dim(), range.len());
        for j in range.clone() {
            part.push(proposals.row(j));
        }
        let mut rng = stream(seed, Purpose::Resample, iteration as u64, g as u64);
        next.extend(&resampler.resample(&part, lw, &mut rng)?);
    }
    Ok(StepResult {
        ess: ess(&log_weights)?,
        weight_variance: weight_variance(&log_weights)?,
        proposals,
        log_weights,
        log_density,
        next,
        drift_fallbacks,
    })
}

pub(crate) fn initial_states(target: &dyn Target, config: &RunConfig) -> Result<Points> {
    use super::config::InitialSpec;
    let dim = target.dim();
    match &config.initial {
        InitialSpec::Prior => {
            let rows = config.execution.map(config.ensemble_size, |j| {
                let mut rng = stream(config.seed, Purpose::Initial, 0, j as u64);
                target.sample_prior(&mut rng)
            });
            Ok(Points::from_rows(dim, &rows))
        }
        InitialSpec::States { states } => Ok(Points::from_rows(dim, states)),
    }
}

fn weighted_mean_log_density(log_density: &[f64], log_weights: &[f64]) -> f64 {
    match normalized_weights(log_weights) {
        Ok(w) => log_density
            .iter()
            .zip(&w)
            .filter(|(_, w)| **w > 0.0)
            .map(|(l, w)| w * l)
            .sum(),
        Err(_) => f64::NAN,
    }
}

/// Runs `config.iterations` PAIS iterations, streaming the weighted
/// proposals into `sink`.
pub fn run_pais_with_sink(
    target: &dyn Target,
    config: &RunConfig,
    sink: &mut dyn SampleSink,
) -> Result<SamplerOutput> {
    config.validate(target.dim())?;
    let mut schedule = ScaleSchedule::new(config, target.dim())?;
    let initial = initial_states(target, config)?;
    let resampler = config.resampler();
    let mut states = initial.clone();
    let mut diagnostics = Vec::with_capacity(config.iterations);
    let mut beta_trace = Vec::with_capacity(config.iterations);
    for i in 0..config.iterations {
        let beta = schedule.current_beta();
        let step = grouped_step(
            target,
            &states,
            schedule.kernels(),
            &schedule.step_groups(),
            resampler,
            config.seed,
            i,
            config.execution,
        )
        .map_err(|e| e.at_iteration(i))?;
        sink.samples(i, &step.proposals, &step.log_weights)?;
        if schedule.is_searching() {
            let groups = schedule.group_ranges();
            let score = |r: &std::ops::Range<usize>| {
                ess(&step.log_weights[r.clone()]).map_or(0.0, |e| e / r.len() as f64)
            };
            schedule.observe(score(&groups[0]), score(&groups[1]));
        }
        let record = DiagnosticsRecord {
            iteration: i,
            ess: step.ess,
            weight_variance: step.weight_variance,
            acceptance_count: None,
            beta,
            drift_fallbacks: step.drift_fallbacks,
            mean_log_density: weighted_mean_log_density(&step.log_density, &step.log_weights),
        };
        sink.diagnostics(&record)?;
        diagnostics.push(record);
        beta_trace.push(beta);
        states = step.next;
        schedule.after_iteration(i)?;
    }
    let ess_series: Vec<f64> = diagnostics
        .iter()
        .map(|d: &DiagnosticsRecord| d.ess)
        .collect();
    Ok(SamplerOutput {
        initial,
        final_states: states,
        burn_in: detect_burn_in(&ess_series, config.ensemble_size, &config.burn_in),
        diagnostics,
        beta_trace,
        final_beta: schedule.current_beta(),
        adaptation: std::mem::take(&mut schedule.events),
        samples: None,
    })
}
