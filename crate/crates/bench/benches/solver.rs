use b3m_bench::desk_program;
use b3m_core::scenario::canonical_t1;
use b3m_core::{build_charging_program, lexmin, solve_min, Objective, ObjectiveBox, SolverConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn solver(c: &mut Criterion) {
    let config = SolverConfig::default();
    let t1 = build_charging_program(&canonical_t1()).unwrap().into_program();
    c.bench_function("solve_min/t1_z1", |b| {
        b.iter(|| solve_min(black_box(&t1), Objective::Z1, &[], &config).unwrap())
    });

    let (program, non) = desk_program(3, 4, 2);
    c.bench_function("lexmin/desk_4x2", |b| {
        b.iter(|| lexmin(black_box(&program), Objective::Z1, &non.region(), &config).unwrap())
    });
    c.bench_function("lexmin/desk_4x2_unbounded", |b| {
        b.iter(|| lexmin(black_box(&program), Objective::Z2, &ObjectiveBox::unbounded(), &config).unwrap())
    });
}

criterion_group!(benches, solver);
criterion_main!(benches);
