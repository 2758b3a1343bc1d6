use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use onecopy_bench::{geometric_spectrum, models};
use onecopy_core::{
    block_spectrum, exact_diag_ground, finite_gaussian_ground, probabilistic_ep, sector_decompose, ModelSpec,
    Occupation, ToeplitzCoeffs, DEFAULT_ABS_TOL,
};

fn coefficients(c: &mut Criterion) {
    let mut g = c.benchmark_group("coefficients");
    for (name, model) in models() {
        g.bench_function(BenchmarkId::new(name, 512), |b| {
            b.iter(|| ToeplitzCoeffs::compute(black_box(&model), 512, DEFAULT_ABS_TOL).unwrap())
        });
    }
    g.finish();
}

fn singular_values(c: &mut Criterion) {
    let mut g = c.benchmark_group("block_spectrum");
    g.sample_size(10);
    let model = ModelSpec::xx(2.0).unwrap();
    let coeffs = ToeplitzCoeffs::compute(&model, 512, DEFAULT_ABS_TOL).unwrap();
    for l in [64, 128, 256, 512] {
        let t = coeffs.toeplitz(l).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(l), &t, |b, t| b.iter(|| block_spectrum(t).unwrap()));
    }
    g.finish();
}

fn linear_program(c: &mut Criterion) {
    let mut g = c.benchmark_group("probabilistic_ep");
    for dims in [16, 64, 256] {
        let s = geometric_spectrum(dims, 0.9);
        g.bench_with_input(BenchmarkId::from_parameter(dims), &s, |b, s| {
            b.iter(|| probabilistic_ep(s, dims).unwrap())
        });
    }
    g.finish();
}

fn sectors(c: &mut Criterion) {
    let model = ModelSpec::xx(2.0).unwrap();
    let t = ToeplitzCoeffs::compute(&model, 256, DEFAULT_ABS_TOL).unwrap().toeplitz(256).unwrap();
    let mu = block_spectrum(&t).unwrap().mu;
    c.bench_function("sector_decompose/256", |b| {
        b.iter(|| sector_decompose(black_box(&mu), Occupation::Plus).unwrap())
    });
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let model = ModelSpec::ising();
    g.bench_function("gaussian/n=256", |b| b.iter(|| finite_gaussian_ground(&model, 256, 64).unwrap()));
    g.bench_function("exact_diag/n=9", |b| b.iter(|| exact_diag_ground(&model, 9, 3).unwrap()));
    g.finish();
}

criterion_group!(benches, coefficients, singular_values, linear_program, sectors, oracles);
criterion_main!(benches);
