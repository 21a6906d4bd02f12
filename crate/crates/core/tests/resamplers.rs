use pais_core::diagnostics::{normalized_weights, weighted_moment};
use pais_core::resamplers::{
    amr_resample, amr_split, bootstrap_resample, etpf_resample, solve_transport, ResampleMode,
};
use pais_core::Points;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[path = "support/vertex_oracle.rs"]
mod vertex_oracle;
use vertex_oracle::vertex_minimum;

fn random_instance(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> (Vec<f64>, Points) {
    let raw: Vec<f64> = (0..m)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    let raw = if raw.iter().all(|v| *v == 0.0) {
        vec![1.0; m]
    } else {
        raw
    };
    let s: f64 = raw.iter().sum();
    let w = raw.iter().map(|v| v / s).collect();
    let pts: Vec<f64> = (0..m * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    (w, Points::from_flat(dim, pts))
}

#[test]
fn transport_cost_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..100 {
        let m = 2 + trial % 3;
        let dim = 1 + trial % 2;
        let (w, y) = random_instance(&mut rng, m, dim);
        let plan = solve_transport(&w, &y).unwrap();
        let oracle = vertex_minimum(&w, &y);
        assert!(
            (plan.cost() - oracle).abs() < 1e-9,
            "trial {trial}: {} vs {oracle}",
            plan.cost()
        );
        assert!(plan.entries().len() < 2 * m);
        let dense = plan.dense();
        for i in 0..m {
            let row: f64 = (0..m).map(|j| dense[i * m + j]).sum();
            assert!((row - w[i]).abs() < 1e-10);
            let col: f64 = (0..m).map(|k| dense[k * m + i]).sum();
            assert!((col - 1.0 / m as f64).abs() < 1e-10);
        }
    }
}

#[test]
fn spec_examples() {
    let y = Points::from_scalars(&[0.0, 1.0]);
    let lw = [0.75f64.ln(), 0.25f64.ln()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = etpf_resample(&y, &lw, ResampleMode::Deterministic, &mut rng).unwrap();
    assert!((x.row(0)[0]).abs() < 1e-12 && (x.row(1)[0] - 0.5).abs() < 1e-12);
    let x = amr_resample(&y, &lw, ResampleMode::Deterministic, &mut rng).unwrap();
    assert!((x.row(0)[0]).abs() < 1e-12 && (x.row(1)[0] - 0.5).abs() < 1e-12);
    let x = etpf_resample(
        &y,
        &[0.0, f64::NEG_INFINITY],
        ResampleMode::Deterministic,
        &mut rng,
    )
    .unwrap();
    assert_eq!(x.as_flat(), &[0.0, 0.0]);
}

#[test]
fn bootstrap_selects_uniformly() {
    let y = Points::from_scalars(&[0.0, 1.0, 2.0, 3.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut counts = [0usize; 4];
    let repeats = 100_000;
    for _ in 0..repeats {
        let x = bootstrap_resample(&y, &[0.0; 4], &mut rng).unwrap();
        for v in x.coordinate(0) {
            counts[v as usize] += 1;
        }
    }
    for c in counts {
        let f = c as f64 / (4 * repeats) as f64;
        assert!((f - 0.25).abs() < 0.005, "{f}");
    }
    let a =
        bootstrap_resample(&y, &[0.1, 0.2, 0.3, 0.4], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b =
        bootstrap_resample(&y, &[0.1, 0.2, 0.3, 0.4], &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bootstrap_preserves_the_mean_in_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let m = 20;
    let ys: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let lw: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = Points::from_scalars(&ys);
    let w = normalized_weights(&lw).unwrap();
    let mean = weighted_moment(&ys, Some(&w), 1).unwrap();
    let var = weighted_moment(&ys, Some(&w), 2).unwrap() - mean * mean;
    let repeats = 10_000;
    let mut total = 0.0;
    for _ in 0..repeats {
        let x = bootstrap_resample(&y, &lw, &mut rng).unwrap();
        total += x.coordinate(0).sum::<f64>() / m as f64;
    }
    let avg = total / repeats as f64;
    let sigma = (var / m as f64 / repeats as f64).sqrt();
    assert!(
        (avg - mean).abs() < 3.0 * sigma,
        "{avg} vs {mean} ± {sigma}"
    );
}

#[test]
fn amr_keeps_every_heavy_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let m = rng.random_range(2..40);
        let (w, y) = random_instance(&mut rng, m, 1);
        let split = amr_split(&w, &y).unwrap();
        let anchors = split.anchors();
        for (j, wj) in w.iter().enumerate() {
            if *wj >= 1.0 / m as f64 {
                assert!(anchors.contains(&j), "index {j} with weight {wj}");
            }
        }
    }
}

/// Draws `M` points from N(1, 2) weighted toward N(2, 3) and returns the mean
/// relative errors in the second and third moments of each resampler's
/// output against the weighted sample, averaged over `repeats`.
fn benchmark_errors(m: usize, repeats: usize, seed: u64) -> [[f64; 2]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let proposal = Normal::new(1.0, 2f64.sqrt()).unwrap();
    let log_n = |x: f64, mu: f64, var: f64| -(x - mu).powi(2) / (2.0 * var) - 0.5 * var.ln();
    let mut sums = [[0.0; 2]; 3];
    for _ in 0..repeats {
        let ys: Vec<f64> = (0..m).map(|_| proposal.sample(&mut rng)).collect();
        let lw: Vec<f64> = ys
            .iter()
            .map(|y| log_n(*y, 2.0, 3.0) - log_n(*y, 1.0, 2.0))
            .collect();
        let w = normalized_weights(&lw).unwrap();
        let y = Points::from_scalars(&ys);
        let outputs = [
            etpf_resample(&y, &lw, ResampleMode::Deterministic, &mut rng).unwrap(),
            amr_resample(&y, &lw, ResampleMode::Deterministic, &mut rng).unwrap(),
            bootstrap_resample(&y, &lw, &mut rng).unwrap(),
        ];
        for (s, x) in outputs.iter().enumerate() {
            let xs: Vec<f64> = x.coordinate(0).collect();
            for (k, order) in [2u32, 3].into_iter().enumerate() {
                let reference = weighted_moment(&ys, Some(&w), order).unwrap();
                let estimate = weighted_moment(&xs, None, order).unwrap();
                sums[s][k] += ((estimate - reference) / reference).abs();
            }
        }
    }
    sums.map(|r| r.map(|v| v / repeats as f64))
}

#[test]
fn moment_error_ordering() {
    let mut comparisons = 0;
    let mut violations = Vec::new();
    for m in [32, 64, 128] {
        let e = benchmark_errors(m, 200, m as u64);
        for (k, _) in e[0].iter().enumerate().take(2) {
            for (a, b) in [(0, 1), (1, 2)] {
                comparisons += 1;
                if e[a][k] > e[b][k] {
                    violations.push((m, k + 2, a, b, e[a][k], e[b][k]));
                }
            }
        }
    }
    assert!(
        violations.len() as f64 <= 0.05 * comparisons as f64,
        "{violations:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn deterministic_resamplers_preserve_the_mean(
        pts in prop::collection::vec(-10.0f64..10.0, 2..40),
        logs in prop::collection::vec(-20.0f64..5.0, 40),
    ) {
        let m = pts.len();
        let lw = &logs[..m];
        let y = Points::from_scalars(&pts);
        let w = normalized_weights(lw).unwrap();
        let mean: f64 = pts.iter().zip(&w).map(|(p, w)| p * w).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for x in [
            etpf_resample(&y, lw, ResampleMode::Deterministic, &mut rng).unwrap(),
            amr_resample(&y, lw, ResampleMode::Deterministic, &mut rng).unwrap(),
        ] {
            let out = x.coordinate(0).sum::<f64>() / m as f64;
            prop_assert!((out - mean).abs() < 1e-12, "{} vs {}", out, mean);
        }
    }

    #[test]
    fn amr_rows_conserve_the_weights(
        pts in prop::collection::vec(-10.0f64..10.0, 2..40),
        raw in prop::collection::vec(0.0f64..1.0, 40),
    ) {
        let m = pts.len();
        let total: f64 = raw[..m].iter().sum();
        prop_assume!(total > 0.0);
        let w: Vec<f64> = raw[..m].iter().map(|v| v / total).collect();
        let split = amr_split(&w, &Points::from_scalars(&pts)).unwrap();
        let dense = split.dense();
        for row in &dense {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|p| *p >= 0.0));
        }
        for j in 0..m {
            let avg = dense.iter().map(|r| r[j]).sum::<f64>() / m as f64;
            prop_assert!((avg - w[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn amr_with_uniform_weights_permutes(pts in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let m = pts.len();
        let y = Points::from_scalars(&pts);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = amr_resample(&y, &vec![0.0; m], ResampleMode::Deterministic, &mut rng).unwrap();
        let mut a: Vec<f64> = x.coordinate(0).collect();
        let mut b = pts.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
        let mut anchors = amr_split(&vec![1.0 / m as f64; m], &y).unwrap().anchors();
        anchors.sort();
        prop_assert_eq!(anchors, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn etpf_outputs_lie_in_the_convex_hull(
        pts in prop::collection::vec(-10.0f64..10.0, 2..30),
        logs in prop::collection::vec(-5.0f64..5.0, 30),
    ) {
        let m = pts.len();
        let y = Points::from_scalars(&pts);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = etpf_resample(&y, &logs[..m], ResampleMode::Deterministic, &mut rng).unwrap();
        let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in x.coordinate(0) {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }
}
