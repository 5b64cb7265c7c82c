use b3m_bench::desk_program;
use b3m_core::frontier::{run_method, Method, Tolerance};
use b3m_core::SolverConfig;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn methods(c: &mut Criterion) {
    let config = SolverConfig::default();
    let (program, non) = desk_program(3, 4, 2);
    let mut group = c.benchmark_group("frontier/desk_4x2");
    for method in Method::ALL {
        for eps in [0, 3] {
            if method == Method::Bbox && eps > 0 {
                continue;
            }
            let id = BenchmarkId::new(method.as_str(), eps);
            group.bench_with_input(id, &Tolerance::from_percent(eps), |b, &e| {
                b.iter(|| run_method(&program, non, method, e, &config).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, methods);
criterion_main!(benches);
