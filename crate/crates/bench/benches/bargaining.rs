use b3m_bench::staircase;
use b3m_core::bargaining::{distance_select, gnb_select, Alpha, ReferencePoints};
use b3m_core::CriterionPoint;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bargaining(c: &mut Criterion) {
    let points = staircase(200);
    let d = CriterionPoint::new(5000, 5000);
    let refs = ReferencePoints::new(CriterionPoint::new(0, 0), d).unwrap();
    c.bench_function("gnb/200", |b| {
        b.iter(|| gnb_select(black_box(&points), d, 0.5).unwrap())
    });
    for (name, alpha) in [("dist_2/200", Alpha::Finite(2.0)), ("dist_inf/200", Alpha::Infinity)] {
        c.bench_function(name, |b| {
            b.iter(|| distance_select(black_box(&points), &refs, alpha).unwrap())
        });
    }
}

criterion_group!(benches, bargaining);
criterion_main!(benches);
