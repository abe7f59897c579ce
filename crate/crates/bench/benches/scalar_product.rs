use bethe_scalar::contour::{evaluate_integral, h_offshell, h_offshell_recursive, s1_closed, Variant};
use bethe_scalar::monodromy::build_monodromy;
use bethe_scalar::oracle::scalar_product_raw;
use bethe_scalar_bench::fixture;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    for (n, l) in [(1, 4), (2, 6), (3, 8), (4, 10)] {
        let f = fixture(n, l, 7);
        g.bench_with_input(BenchmarkId::new("scalar_product", format!("n{n}_L{l}")), &f, |b, f| {
            b.iter(|| scalar_product_raw(black_box(&f.x), black_box(&f.y), &f.params))
        });
    }
    g.finish();
}

fn integral(c: &mut Criterion) {
    let mut g = c.benchmark_group("integral");
    for (n, l) in [(2, 6), (3, 8), (4, 10)] {
        let f = fixture(n, l, 7);
        g.bench_with_input(BenchmarkId::new("offshell", format!("n{n}_L{l}")), &f, |b, f| {
            b.iter(|| evaluate_integral(black_box(&f.x), black_box(&f.y), &f.params, Variant::OffShell).unwrap())
        });
    }
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let f = fixture(3, 6, 7);
    c.bench_function("h_offshell/n3", |b| b.iter(|| h_offshell(black_box(&f.x), &f.y, &f.params).unwrap()));
    c.bench_function("h_offshell_recursive/n3", |b| {
        b.iter(|| h_offshell_recursive(black_box(&f.x), &f.y, &f.params).unwrap())
    });
    let f1 = fixture(1, 6, 7);
    c.bench_function("s1_closed/L6", |b| b.iter(|| s1_closed(black_box(f1.x[0]), f1.y[0], &f1.params).unwrap()));
    let f6 = fixture(1, 6, 7);
    c.bench_function("monodromy/L6", |b| b.iter(|| build_monodromy(black_box(f6.x[0]), &f6.params)));
}

criterion_group!(benches, oracle, integral, kernels);
criterion_main!(benches);
