use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mnemos::insight::{run_bandit, run_bandit_sequential, PolicyKind};
use mnemos::minimality::{check_minimality, check_minimality_sequential};
use mnemos::sharing::{compare, compare_sequential, Coupling, SharingParams};
use mnemos::simenv::BanditEnv;

fn bandit(c: &mut Criterion) {
    let env = BanditEnv::default_three_arm();
    let policy = PolicyKind::EpsGreedy { epsilon: 0.1 };
    let mut g = c.benchmark_group("bandit_200_trials");
    g.bench_function("parallel", |b| b.iter(|| run_bandit(&env, policy, 1000, 200, black_box(7)).unwrap()));
    g.bench_function("sequential", |b| {
        b.iter(|| run_bandit_sequential(&env, policy, 1000, 200, black_box(7)).unwrap())
    });
    g.finish();
}

fn sharing(c: &mut Criterion) {
    let params = SharingParams::default();
    let mut g = c.benchmark_group("sharing_32_replications");
    g.bench_function("parallel", |b| b.iter(|| compare(&params, Coupling::Independent, 32, black_box(7)).unwrap()));
    g.bench_function("sequential", |b| {
        b.iter(|| compare_sequential(&params, Coupling::Independent, 32, black_box(7)).unwrap())
    });
    g.finish();
}

fn minimality(c: &mut Criterion) {
    let mut g = c.benchmark_group("minimality_1000_cases");
    g.bench_function("parallel", |b| b.iter(|| check_minimality(1000, black_box(7)).unwrap()));
    g.bench_function("sequential", |b| b.iter(|| check_minimality_sequential(1000, black_box(7)).unwrap()));
    g.finish();
}

criterion_group!(benches, bandit, sharing, minimality);
criterion_main!(benches);
