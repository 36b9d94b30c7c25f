use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpbound::{toys, BoundContext, Execution, Method, Side};

fn splits(c: &mut Criterion) {
    let mut group = c.benchmark_group("robust-envelope-toy3-N10");
    group.sample_size(20);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                let ctx = BoundContext::new(toys::toy3()).unwrap();
                ctx.bound(Method::RobustEnvelope, Side::Upper, 10, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn refine_children(c: &mut Criterion) {
    use lpbound::refine::{refine, RefineConfig};
    use std::time::Duration;
    let mut group = c.benchmark_group("refine-toy1-yzflat");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| {
                let ctx = BoundContext::new(toys::toy1()).unwrap();
                let mut cfg = RefineConfig::new(Method::RobustYzflat, Method::RobustYzflat, 0.05, Duration::from_secs(60));
                cfg.max_iterations = Some(40);
                cfg.execution = exec;
                refine(&ctx, &cfg).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, splits, refine_children);
criterion_main!(benches);
