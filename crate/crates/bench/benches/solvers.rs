use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use otrates_bench::{correlated_pair, gaussian_pair};
use otrates_core::ratelab::{geometric_grid, run_gaussian_sweep};
use otrates_core::sinkhorn::{CostKernel, SinkhornOptions, SinkhornSolver};
use std::hint::black_box;

fn sinkhorn_1d(c: &mut Criterion) {
    let mut group = c.benchmark_group("sinkhorn_1d");
    group.sample_size(10);
    for n in [101, 401] {
        let (mu, nu) = gaussian_pair(&[1.0], &[2.0], n);
        let solver = SinkhornSolver::new(&mu, &nu).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                solver
                    .solve_scaled(black_box(0.5), None, &SinkhornOptions::default())
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn kernel_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_update_2d");
    let (mu, nu) = gaussian_pair(&[1.0, 1.0], &[2.0, 2.0], 41);
    let g = vec![0.0; nu.len()];
    let dense = CostKernel::dense(&mu, &nu).unwrap();
    let separable = CostKernel::new(&mu, &nu).unwrap();
    group.bench_function("dense", |b| b.iter(|| dense.update_f(black_box(&g), 0.5)));
    group.bench_function("separable", |b| b.iter(|| separable.update_f(black_box(&g), 0.5)));
    group.finish();
}

fn gaussian_sweep(c: &mut Criterion) {
    let (a, b) = correlated_pair();
    let eps = geometric_grid(1.0, 1e-3, 12).unwrap();
    c.bench_function("gaussian_sweep_3d", |bench| {
        bench.iter(|| run_gaussian_sweep(&a, &b, 2.0, black_box(&eps)).unwrap())
    });
}

criterion_group!(benches, sinkhorn_1d, kernel_update, gaussian_sweep);
criterion_main!(benches);
