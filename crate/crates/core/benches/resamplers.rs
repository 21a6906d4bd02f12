use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pais_core::diagnostics::normalized_weights;
use pais_core::resamplers::{amr_split, bootstrap_resample, solve_transport};
use pais_core::rng::{stream, Purpose};
use pais_core::Points;
use rand_distr::{Distribution, Normal};
use std::hint::black_box;

/// `M` draws from N(1, 2) with log weights toward N(2, 3).
fn weighted_sample(m: usize) -> (Points, Vec<f64>) {
    let mut rng = stream(0, Purpose::Benchmark, m as u64, 0);
    let proposal = Normal::new(1.0, 2f64.sqrt()).unwrap();
    let ys: Vec<f64> = (0..m).map(|_| proposal.sample(&mut rng)).collect();
    let lw = ys
        .iter()
        .map(|y| -(y - 2.0).powi(2) / 6.0 + (y - 1.0).powi(2) / 4.0)
        .collect();
    (Points::from_scalars(&ys), lw)
}

fn resamplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("resamplers");
    group.sample_size(10);
    for m in [64, 128, 256, 512] {
        let (y, lw) = weighted_sample(m);
        let w = normalized_weights(&lw).unwrap();
        group.bench_with_input(BenchmarkId::new("etpf", m), &m, |b, _| {
            b.iter(|| black_box(solve_transport(&w, &y).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("amr", m), &m, |b, _| {
            b.iter(|| black_box(amr_split(&w, &y).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("bootstrap", m), &m, |b, _| {
            let mut rng = stream(1, Purpose::Benchmark, 0, 0);
            b.iter(|| black_box(bootstrap_resample(&y, &lw, &mut rng).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, resamplers);
criterion_main!(benches);
