//! Wall-clock scaling of the resamplers. Kept in its own test binary so no
//! other test competes for the CPU while it runs.

use pais_core::diagnostics::normalized_weights;
use pais_core::resamplers::{amr_split, solve_transport};
use pais_core::Points;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::time::Instant;

fn median_seconds(mut f: impl FnMut(), repeats: usize) -> f64 {
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[repeats / 2]
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn cost_scaling() {
    let sizes = [64usize, 128, 256, 512];
    let mut amr = Vec::new();
    let mut etpf = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let proposal = Normal::new(1.0, 2f64.sqrt()).unwrap();
    for &m in &sizes {
        let ys: Vec<f64> = (0..m).map(|_| proposal.sample(&mut rng)).collect();
        let lw: Vec<f64> = ys
            .iter()
            .map(|y| -(y - 2.0).powi(2) / 6.0 + (y - 1.0).powi(2) / 4.0)
            .collect();
        let w = normalized_weights(&lw).unwrap();
        let y = Points::from_scalars(&ys);
        let reps = if m >= 256 { 3 } else { 7 };
        amr.push(median_seconds(
            || {
                std::hint::black_box(amr_split(&w, &y).unwrap());
            },
            reps * 3,
        ));
        etpf.push(median_seconds(
            || {
                std::hint::black_box(solve_transport(&w, &y).unwrap());
            },
            reps,
        ));
    }
    let xs: Vec<f64> = sizes.iter().map(|m| *m as f64).collect();
    let (sa, se) = (loglog_slope(&xs, &amr), loglog_slope(&xs, &etpf));
    assert!(sa <= 2.3, "AMR exponent {sa}: {amr:?}");
    // The simplex with partial pricing measures about M^2.4 here; the cubic
    // figure is its worst case.
    assert!(se >= 2.2 && se >= sa + 0.25, "ETPF exponent {se}: {etpf:?}");
    assert!(amr[3] < etpf[3]);
}
