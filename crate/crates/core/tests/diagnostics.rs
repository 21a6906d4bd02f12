use pais_core::diagnostics::{
    build_histogram, ess, normalized_weights, relative_l2_error, weight_variance, BinnedDensity,
    GridSpec,
};
use pais_core::Points;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn ess_matches_the_variance_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = 1000;
    for _ in 0..20 {
        let lw: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let w = normalized_weights(&lw).unwrap();
        let mean = 1.0 / m as f64;
        let second = w.iter().map(|v| (v / mean).powi(2)).sum::<f64>() / m as f64;
        let var = weight_variance(&lw).unwrap();
        let identity = m as f64 * (1.0 - var / second);
        let e = ess(&lw).unwrap();
        // Sample (n − 1) versus population variance: an O(1) gap on an
        // O(M) quantity.
        assert!((identity - e).abs() <= 1.1, "{identity} vs {e}");
    }
}

#[test]
fn normal_histogram_matches_the_cdf() {
    let grid = GridSpec::one_d(-5.0, 5.0, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws: Vec<f64> = (0..1_000_000)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let hist = build_histogram(&Points::from_scalars(&draws), None, &grid).unwrap();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let integrals = (0..100)
        .map(|k| {
            let a = -5.0 + 0.1 * k as f64;
            normal.cdf(a + 0.1) - normal.cdf(a)
        })
        .collect();
    let reference = BinnedDensity { grid, integrals };
    let e = relative_l2_error(&hist, &reference).unwrap();
    assert!(e < 0.01, "{e}");
}

#[test]
fn l2_error_ignores_the_histogram_scale() {
    let grid = GridSpec::one_d(-5.0, 5.0, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws: Vec<f64> = (0..20_000)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let weights: Vec<f64> = (0..draws.len())
        .map(|_| rng.random_range(0.5..1.5))
        .collect();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let integrals = (0..50)
        .map(|k| {
            let a = -5.0 + 0.2 * k as f64;
            normal.cdf(a + 0.2) - normal.cdf(a)
        })
        .collect();
    let reference = BinnedDensity {
        grid: grid.clone(),
        integrals,
    };
    let base = relative_l2_error(
        &build_histogram(&Points::from_scalars(&draws), Some(&weights), &grid).unwrap(),
        &reference,
    )
    .unwrap();
    let doubled: Vec<f64> = draws.iter().chain(&draws).copied().collect();
    let doubled_w: Vec<f64> = weights.iter().chain(&weights).map(|w| 3.0 * w).collect();
    let again = relative_l2_error(
        &build_histogram(&Points::from_scalars(&doubled), Some(&doubled_w), &grid).unwrap(),
        &reference,
    )
    .unwrap();
    assert!((base - again).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ess_is_scale_invariant_and_bounded(
        lw in prop::collection::vec(-30.0f64..30.0, 1..200),
        shift in -500.0f64..500.0,
    ) {
        let e = ess(&lw).unwrap();
        let shifted: Vec<f64> = lw.iter().map(|w| w + shift).collect();
        prop_assert!((ess(&shifted).unwrap() - e).abs() < 1e-12 * e);
        prop_assert!(e >= 1.0 && e <= lw.len() as f64);
    }

    #[test]
    fn equal_weights_give_full_ess(m in 1usize..500, level in -100.0f64..100.0) {
        prop_assert_eq!(ess(&vec![level; m]).unwrap(), m as f64);
        prop_assert_eq!(weight_variance(&vec![level; m]).unwrap(), 0.0);
    }

    #[test]
    fn log_space_agrees_with_linear_space(w in prop::collection::vec(0.01f64..10.0, 2..100)) {
        let lw: Vec<f64> = w.iter().map(|v| v.ln()).collect();
        let sum: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|v| v * v).sum();
        prop_assert!((ess(&lw).unwrap() - sum * sum / sq).abs() < 1e-10);
        let mean = sum / w.len() as f64;
        let var = w.iter().map(|v| (v / mean - 1.0).powi(2)).sum::<f64>() / (w.len() - 1) as f64;
        prop_assert!((weight_variance(&lw).unwrap() - var).abs() < 1e-10);
        for (a, b) in normalized_weights(&lw).unwrap().iter().zip(&w) {
            prop_assert!((a - b / sum).abs() < 1e-10);
        }
    }
}
