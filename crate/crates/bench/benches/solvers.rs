use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nearmetz_bench::{a1, box_qp, random_symmetric};
use nearmetz_core::dense::sym_eig;
use nearmetz_core::{qp_solve, solve_nearest_metzler, ConeMode, QpSettings, SolverOptions};
use std::hint::black_box;

fn bench_sym_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("sym_eig");
    for n in [5, 20, 50] {
        let s = random_symmetric(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| sym_eig(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bench_qp(c: &mut Criterion) {
    let mut group = c.benchmark_group("qp_solve");
    for n in [6, 30] {
        let prob = box_qp(n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prob, |b, p| {
            b.iter(|| qp_solve(black_box(p), &QpSettings::default(), None).unwrap())
        });
    }
    group.finish();
}

fn bench_a1(c: &mut Criterion) {
    let a = a1();
    let mut group = c.benchmark_group("solve_a1");
    group.sample_size(10);
    for mode in [ConeMode::Psd, ConeMode::Dd, ConeMode::Sdd] {
        let opts = SolverOptions { mode, ..SolverOptions::default() };
        group.bench_function(mode.as_str(), |b| {
            b.iter(|| solve_nearest_metzler(black_box(&a), &opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sym_eig, bench_qp, bench_a1);
criterion_main!(benches);
