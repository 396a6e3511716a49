use beltrami::exec::Execution;
use beltrami::random::Shape;
use beltrami::scenario::{random_scenario, run_batch, RandomParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn batch(c: &mut Criterion) {
    let params = RandomParams { n: 2, r: 2, order: 3, shape: Shape::default() };
    let scenarios: Vec<_> = (0..16).map(|seed| random_scenario(params, seed).unwrap()).collect();
    let mut group = c.benchmark_group("run_batch");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| run_batch(&scenarios, exec)));
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
