use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mu_audit::{
    compare_mechanisms, operator_best_response_numeric, simulate_audit, solve_ne, solve_ne_numeric,
    solve_spe, sweep_eta, FixedPointConfig, GameParams, SimConfig, SimMode, StrategyProfile,
    TraConfig,
};

fn ideal() -> GameParams {
    GameParams { xi: 1.0, ..GameParams::default() }
}

fn equilibria(c: &mut Criterion) {
    let params = GameParams::default();
    let fp = FixedPointConfig::default();
    c.bench_function("solve_ne", |b| b.iter(|| solve_ne(black_box(&params)).unwrap()));
    c.bench_function("solve_ne_numeric", |b| {
        b.iter(|| solve_ne_numeric(black_box(&params), &fp).unwrap())
    });
    c.bench_function("solve_spe", |b| b.iter(|| solve_spe(black_box(&params)).unwrap()));
    c.bench_function("operator_best_response_numeric", |b| {
        b.iter(|| operator_best_response_numeric(black_box(&params), black_box(7.35)).unwrap())
    });
    let tra = TraConfig::default_for(&params);
    c.bench_function("compare_mechanisms", |b| {
        b.iter(|| compare_mechanisms(black_box(&params), &tra).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let params = ideal();
    let grid: Vec<f64> = (1..=100).map(|i| 0.0025 * i as f64).collect();
    c.bench_function("sweep_eta_100", |b| b.iter(|| sweep_eta(black_box(&params), &grid)));
}

fn simulation(c: &mut Criterion) {
    let params = GameParams::default();
    let profile = StrategyProfile::finite(0.14, 7.35);
    let mut group = c.benchmark_group("simulate_audit_100k");
    group.sample_size(20);
    for mode in [SimMode::ContinuousFormula, SimMode::IntegerRandomized] {
        let config = SimConfig { seed: 1, trials: 100_000, mode };
        group.bench_function(mode.as_str(), |b| {
            b.iter(|| simulate_audit(black_box(&params), profile, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, equilibria, sweeps, simulation);
criterion_main!(benches);
