use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use satloc::bounds::{default_max_epsilon, lp_lower_bound, max_variant_gadget, sum_variant_gadget, SolveMode};
use satloc::harness::{random_instances, GeneratorConfig};
use satloc::{check_sp, solve, MechanismId, Objective, Setting, Variant};

fn optimal_solvers(c: &mut Criterion) {
    let config = GeneratorConfig { n_max: 8, omega_max: 4, ..GeneratorConfig::new(Setting::Obnoxious, Variant::Sum, 42) };
    let instances = random_instances(&config, 64);
    let mut group = c.benchmark_group("solve");
    for objective in [Objective::Ss, Objective::Ms] {
        group.bench_with_input(BenchmarkId::from_parameter(objective), &objective, |b, &objective| {
            b.iter(|| instances.iter().for_each(|inst| drop(black_box(solve(black_box(inst), objective)))))
        });
    }
    group.finish();
}

fn mechanisms(c: &mut Criterion) {
    let mut group = c.benchmark_group("mechanism");
    for id in MechanismId::ALL {
        let config = GeneratorConfig::on_label(id, 42);
        let instances = random_instances(&config, 64);
        group.bench_with_input(BenchmarkId::from_parameter(id), &id, |b, &id| {
            b.iter(|| instances.iter().for_each(|inst| drop(black_box(id.run(black_box(inst))))))
        });
    }
    group.finish();
}

fn sp_check(c: &mut Criterion) {
    let config = GeneratorConfig { n_max: 4, omega_max: 3, coordinate_grid: 12, ..GeneratorConfig::on_label(MechanismId::M1, 42) };
    let instances = random_instances(&config, 8);
    c.bench_function("check_sp/M1/grid12", |b| {
        b.iter(|| instances.iter().filter(|inst| check_sp(&MechanismId::M1, black_box(inst), 12).witness.is_none()).count())
    });
}

fn certificates(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp_lower_bound");
    group.sample_size(10);
    let sum = sum_variant_gadget();
    let max = max_variant_gadget(&default_max_epsilon(64)).unwrap();
    for grid in [32u32, 64] {
        group.bench_with_input(BenchmarkId::new("sum/floating", grid), &grid, |b, &g| {
            b.iter(|| lp_lower_bound(&sum, g, SolveMode::Floating).unwrap().bound)
        });
        group.bench_with_input(BenchmarkId::new("max/exact", grid), &grid, |b, &g| {
            b.iter(|| lp_lower_bound(&max, g, SolveMode::Exact).unwrap().bound)
        });
    }
    group.finish();
}

criterion_group!(benches, optimal_solvers, mechanisms, sp_check, certificates);
criterion_main!(benches);
