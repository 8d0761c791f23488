use criterion::{black_box, criterion_group, criterion_main, Criterion};

use prophetlab_bench::{random, small, split_coin};
use prophetlab_core::benchmarks::{backward_induction, expected_kth_max, expected_max, opt_free_order};
use prophetlab_core::kertz::{solve_beta, DEFAULT_GRID};
use prophetlab_core::ordering::{build_grid, build_tables, order_general, solve_cp};
use prophetlab_core::policies::{run_time_policy, small_prophets_policy};
use prophetlab_core::sim::run_stateless;
use prophetlab_core::KertzSolution;

fn kertz(c: &mut Criterion) {
    c.bench_function("solve_beta 1e-8", |b| b.iter(|| solve_beta(black_box(1e-8)).unwrap()));
    let beta = solve_beta(1e-10).unwrap();
    c.bench_function("tabulate curve", |b| b.iter(|| KertzSolution::solve(beta, DEFAULT_GRID).unwrap()));
}

fn benchmarks(c: &mut Criterion) {
    let inst = split_coin(1000);
    c.bench_function("expected_max n=1000", |b| b.iter(|| expected_max(black_box(&inst)).unwrap()));
    let inst = random(200, 1);
    c.bench_function("expected_kth_max n=200 k=10", |b| b.iter(|| expected_kth_max(&inst, 10).unwrap()));
    let inst = random(14, 2);
    c.bench_function("opt_free_order n=14", |b| b.iter(|| opt_free_order(&inst).unwrap()));
}

fn ordering(c: &mut Criterion) {
    let inst = small(20, 0.1, 3);
    let tables = build_tables(&inst, &build_grid(&inst, 0.1).unwrap());
    c.bench_function("solve_cp n=20 eps=0.1", |b| b.iter(|| solve_cp(&tables, None).unwrap()));
    let inst = random(8, 4);
    let mut group = c.benchmark_group("order_general");
    group.sample_size(10);
    group.bench_function("n=8 eps=0.1", |b| b.iter(|| order_general(&inst, 0.1, 0).unwrap()));
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let inst = random(50, 5);
    let order: Vec<usize> = (0..inst.len()).collect();
    let pol = backward_induction(&inst, &order).unwrap();
    c.bench_function("run_stateless 100k", |b| b.iter(|| run_stateless(&inst, &pol, 100_000, 0)));
    let sol = KertzSolution::solve(solve_beta(1e-10).unwrap(), DEFAULT_GRID).unwrap();
    let inst = split_coin(200);
    let pol = small_prophets_policy(&inst, 0.05, &sol).unwrap();
    c.bench_function("small prophets n=200 10k", |b| b.iter(|| run_time_policy(&inst, &pol, 10_000, 0)));
}

criterion_group!(benches, kertz, benchmarks, ordering, simulation);
criterion_main!(benches);
