use covpovm_bench::{sample_kernel, systems};
use covpovm_core::povm::random_davies_seed;
use covpovm_core::{
    davies_povm, factorize_kernel, is_extremal, kernel_from_povm, povm_from_kernel, rank1_existence, Tolerances,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn conversions(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("conversion");
    for (name, sys) in systems() {
        let k = sample_kernel(&sys);
        let p = povm_from_kernel(&k, &tol).unwrap();
        group.bench_with_input(BenchmarkId::new("povm_from_kernel", name), &k, |b, k| {
            b.iter(|| povm_from_kernel(black_box(k), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("kernel_from_povm", name), &p, |b, p| {
            b.iter(|| kernel_from_povm(black_box(p), &tol).unwrap())
        });
        let seed = random_davies_seed(&sys, 3);
        group.bench_with_input(BenchmarkId::new("davies_povm", name), &seed, |b, s| {
            b.iter(|| davies_povm(black_box(s), &tol).unwrap())
        });
    }
    group.finish();
}

fn extremality(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("extremality");
    for (name, sys) in systems() {
        let k = sample_kernel(&sys);
        group.bench_with_input(BenchmarkId::new("factorize", name), &k, |b, k| {
            b.iter(|| factorize_kernel(black_box(k), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("is_extremal", name), &k, |b, k| {
            b.iter(|| is_extremal(black_box(k), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rank1_existence", name), &sys, |b, s| {
            b.iter(|| rank1_existence(black_box(s)))
        });
    }
    group.finish();
}

criterion_group!(benches, conversions, extremality);
criterion_main!(benches);
