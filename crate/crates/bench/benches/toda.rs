use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use toda_core::flow::{solve_rk4, solve_symes, solve_tau};
use toda_core::jacobi::{abel_jacobi, reconstruct};
use toda_core::sampling::{random_cone_point, random_dominant_tnn, random_spectrum, sample_rng};
use toda_core::tnn::{is_tnn_exhaustive, is_tnn_interlacing, is_tnn_tridiagonal};

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_t2");
    for n in [2usize, 4, 6] {
        let l0 = random_dominant_tnn(&mut sample_rng(0, n as u64), n);
        group.bench_with_input(BenchmarkId::new("tau", n), &l0, |b, l| {
            b.iter(|| solve_tau(black_box(l), 2.0))
        });
        group.bench_with_input(BenchmarkId::new("symes", n), &l0, |b, l| {
            b.iter(|| solve_symes(black_box(l), 2.0))
        });
        group.bench_with_input(BenchmarkId::new("rk4", n), &l0, |b, l| {
            b.iter(|| solve_rk4(black_box(l), 2.0, 1e-3))
        });
    }
    group.finish();
}

fn linearization(c: &mut Criterion) {
    let mut group = c.benchmark_group("linearization");
    for n in [2usize, 4, 8] {
        let mut rng = sample_rng(1, n as u64);
        let spec = random_spectrum(&mut rng, n, 0.1, 10.0, 0.0);
        let f = random_cone_point(&mut rng, n, 3.0);
        let l = reconstruct(&spec, &f).unwrap();
        group.bench_with_input(BenchmarkId::new("reconstruct", n), &n, |b, _| {
            b.iter(|| reconstruct(black_box(&spec), black_box(&f)))
        });
        group.bench_with_input(BenchmarkId::new("abel_jacobi", n), &l, |b, l| {
            b.iter(|| abel_jacobi(black_box(l)))
        });
    }
    group.finish();
}

fn tnn_tests(c: &mut Criterion) {
    let mut group = c.benchmark_group("tnn");
    for n in [4usize, 6, 8] {
        let l = random_dominant_tnn(&mut sample_rng(2, n as u64), n);
        let dense = l.to_dense();
        let tri = l.as_tridiagonal();
        group.bench_with_input(BenchmarkId::new("exhaustive", n), &dense, |b, m| {
            b.iter(|| is_tnn_exhaustive(black_box(m), 0.0))
        });
        group.bench_with_input(BenchmarkId::new("tridiagonal", n), &tri, |b, t| {
            b.iter(|| is_tnn_tridiagonal(black_box(t), 0.0))
        });
        group.bench_with_input(BenchmarkId::new("interlacing", n), &l, |b, l| {
            b.iter(|| is_tnn_interlacing(black_box(l)))
        });
    }
    group.finish();
}

criterion_group!(benches, solvers, linearization, tnn_tests);
criterion_main!(benches);
