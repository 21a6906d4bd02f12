use super::burn_in::detect_plateau;
use super::config::{Objective, RunConfig};
use super::output::{SampleSink, SamplerOutput};
use super::pais::initial_states;
use super::schedule::ScaleSchedule;
use crate::diagnostics::DiagnosticsRecord;
use crate::kernels::ProposalKernel;
use crate::rng::{stream, Purpose};
use crate::targets::Target;
use crate::{Points, Result};
use rand::Rng;

/// `true` when a move with log acceptance ratio `log_ratio` is accepted
/// against the uniform draw `u ∈ [0, 1)`.
pub fn mh_accept(log_ratio: f64, u: f64) -> bool {
    u.ln() < log_ratio
}

struct Move {
    state: Vec<f64>,
    log_density: f64,
    accepted: bool,
    drift_fallbacks: usize,
}

fn mh_move(
    target: &dyn Target,
    kernel: &ProposalKernel,
    x: &[f64],
    log_pi_x: f64,
    seed: u64,
    iteration: usize,
    member: usize,
) -> Result<Move> {
    let mut rng = stream(seed, Purpose::Propose, iteration as u64, member as u64);
    let forward = kernel.component(x, target)?;
    let y = forward.sample(&mut rng);
    let u: f64 = rng.random();
    let log_pi_y = target.log_density(&y);
    let mut drift_fallbacks = forward.drift_fallbacks;
    let mut log_ratio = log_pi_y - log_pi_x;
    if log_pi_y > f64::NEG_INFINITY && !kernel.kind().is_symmetric() {
        let backward = kernel.component(&y, target)?;
        drift_fallbacks += backward.drift_fallbacks;
        log_ratio += backward.log_density(x) - forward.log_density(&y);
    }
    if log_pi_y > f64::NEG_INFINITY && mh_accept(log_ratio, u) {
        Ok(Move {
            state: y,
            log_density: log_pi_y,
            accepted: true,
            drift_fallbacks,
        })
    } else {
        Ok(Move {
            state: x.to_vec(),
            log_density: log_pi_x,
            accepted: false,
            drift_fallbacks,
        })
    }
}

/// `M` independent Metropolis-Hastings chains, one step each per
/// iteration. The chain states are streamed with zero log weights.
pub fn run_mh_with_sink(
    target: &dyn Target,
    config: &RunConfig,
    sink: &mut dyn SampleSink,
) -> Result<SamplerOutput> {
    let dim = target.dim();
    config.validate(dim)?;
    let m = config.ensemble_size;
    let exec = config.execution;
    let mut schedule = ScaleSchedule::new(config, dim)?;
    let initial = initial_states(target, config)?;
    let mut states = initial.clone();
    let mut log_pi = exec.map(m, |j| target.log_density(states.row(j)));
    let target_rate = match config.adaptation.objective_for(config.sampler) {
        Objective::Acceptance { target } => target,
        Objective::Ess => 0.5,
    };
    let zeros = vec![0.0; m];
    let mut diagnostics = Vec::with_capacity(config.iterations);
    let mut beta_trace = Vec::with_capacity(config.iterations);
    for i in 0..config.iterations {
        let beta = schedule.current_beta();
        let kernels = schedule.kernels();
        let moves = exec
            .try_map(m, |j| {
                mh_move(
                    target,
                    &kernels[j],
                    states.row(j),
                    log_pi[j],
                    config.seed,
                    i,
                    j,
                )
            })
            .map_err(|e| e.at_iteration(i))?;
        let rows: Vec<&[f64]> = moves.iter().map(|mv| mv.state.as_slice()).collect();
        states = Points::from_rows(dim, rows);
        log_pi = moves.iter().map(|mv| mv.log_density).collect();
        let accepted = moves.iter().filter(|mv| mv.accepted).count();
        sink.samples(i, &states, &zeros)?;
        if schedule.is_searching() {
            let groups = schedule.group_ranges();
            let score = |r: &std::ops::Range<usize>| {
                let acc = moves[r.clone()].iter().filter(|mv| mv.accepted).count();
                -(acc as f64 / r.len() as f64 - target_rate).abs()
            };
            schedule.observe(score(&groups[0]), score(&groups[1]));
        }
        let record = DiagnosticsRecord {
            iteration: i,
            ess: m as f64,
            weight_variance: 0.0,
            acceptance_count: Some(accepted),
            beta,
            drift_fallbacks: moves.iter().map(|mv| mv.drift_fallbacks).sum(),
            mean_log_density: log_pi.iter().sum::<f64>() / m as f64,
        };
        sink.diagnostics(&record)?;
        diagnostics.push(record);
        beta_trace.push(beta);
        schedule.after_iteration(i)?;
    }
    let level: Vec<f64> = diagnostics.iter().map(|d| d.mean_log_density).collect();
    Ok(SamplerOutput {
        initial,
        final_states: states,
        burn_in: detect_plateau(&level, dim as f64, &config.burn_in),
        diagnostics,
        beta_trace,
        final_beta: schedule.current_beta(),
        adaptation: std::mem::take(&mut schedule.events),
        samples: None,
    })
}
