use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gcid_core::{
    CorrelationStructure, CoverageModel, GcidProcess, LevyExponent, OnOffArraySpec, SamplerOptions, SeededRng,
    ServiceDistribution, TimeGrid,
};

fn grid(n: usize) -> TimeGrid {
    TimeGrid::new((0..n).map(|k| 0.25 * k as f64).collect()).unwrap()
}

fn log_cf(c: &mut Criterion) {
    let process = GcidProcess::new(LevyExponent::Gamma, CorrelationStructure::power(0.5).unwrap()).unwrap();
    let mut group = c.benchmark_group("log_cf");
    for n in [4, 16, 64] {
        let g = grid(n);
        let theta: Vec<f64> = (0..n).map(|k| 0.1 * (k as f64 - 2.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| process.log_cf(black_box(&g), black_box(&theta)).unwrap())
        });
    }
    group.finish();
}

fn sample_fidi(c: &mut Criterion) {
    let laws = [
        ("gaussian", LevyExponent::gaussian(0.0, 1.0).unwrap()),
        ("poisson", LevyExponent::poisson(2.0).unwrap()),
        ("gamma", LevyExponent::Gamma),
    ];
    let mut group = c.benchmark_group("sample_fidi");
    for (name, law) in laws {
        let process = GcidProcess::new(law, CorrelationStructure::exponential(1.0).unwrap()).unwrap();
        let sampler = process.sampler(&grid(16), SamplerOptions::default()).unwrap();
        let mut rng = SeededRng::new(1);
        group.bench_function(name, |b| b.iter(|| sampler.sample(&mut rng).unwrap()));
    }
    group.finish();
}

fn coverage(c: &mut Criterion) {
    let model = CoverageModel::new(10.0, ServiceDistribution::Exponential { rate: 1.0 }, None).unwrap();
    let sim = model.simulator(&grid(8)).unwrap();
    let mut rng = SeededRng::new(1);
    c.bench_function("coverage_mminf", |b| b.iter(|| sim.sample(&mut rng)));
}

fn superpose(c: &mut Criterion) {
    let spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0).unwrap();
    let g = grid(4);
    let mut group = c.benchmark_group("superpose");
    for n in [1_000, 10_000, 100_000] {
        let sampler = spec.row(n).unwrap().sampler(&g);
        let mut rng = SeededRng::new(1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| sampler.sample(&mut rng)));
    }
    group.finish();
}

criterion_group!(benches, log_cf, sample_fidi, coverage, superpose);
criterion_main!(benches);
