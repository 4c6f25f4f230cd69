use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gmbe_bench::{ising, regular};
use gmbe_core::optimize::aux_marginals;
use gmbe_core::{default_order, optimize_bound, run_be, run_wmbe, Method, OptimizerConfig};

fn evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("wmbe");
    for ibound in [4, 6] {
        let (g, tree) = ising(10, 10, ibound, 0);
        group.bench_with_input(BenchmarkId::new("ising10x10", ibound), &ibound, |b, _| {
            b.iter(|| run_wmbe(black_box(&g), &tree).unwrap())
        });
        let (g, tree) = regular(180, ibound, 0);
        group.bench_with_input(BenchmarkId::new("regular180", ibound), &ibound, |b, _| {
            b.iter(|| run_wmbe(black_box(&g), &tree).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let (g, _) = ising(10, 10, 4, 0);
    let order = default_order(&g);
    c.bench_function("be/ising10x10", |b| b.iter(|| run_be(black_box(&g), &order).unwrap()));
}

fn marginals(c: &mut Criterion) {
    let (g, tree) = ising(10, 10, 4, 0);
    c.bench_function("aux_marginals/ising10x10", |b| {
        b.iter(|| aux_marginals(black_box(&g), &tree).unwrap())
    });
}

fn iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_iteration");
    group.sample_size(10);
    let (g, tree) = ising(10, 10, 4, 0);
    for m in [Method::WmbeW, Method::WmbeTheta, Method::WmbeG] {
        let config = OptimizerConfig::for_method(m).with_iterations(1);
        group.bench_function(m.tag(), |b| b.iter(|| optimize_bound(black_box(&g), &tree, &config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, evaluation, exact, marginals, iteration);
criterion_main!(benches);
