use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use neel_bench::three_wall_start;
use neel_core::{minimize, EnergyEvaluator, Init, MinimizeConfig};

fn energy_and_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("energy_and_gradient");
    for n in [1025usize, 4097] {
        let (_, p, g, start) = three_wall_start(100.0, n);
        let ev = EnergyEvaluator::new(g);
        group.bench_with_input(BenchmarkId::from_parameter(n), &start, |b, s| {
            b.iter(|| ev.energy_and_gradient(s.phi(), p.h))
        });
    }
    group.finish();
}

fn full_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize");
    group.sample_size(10);
    let (d, p, g, start) = three_wall_start(100.0, 1025);
    let cfg = MinimizeConfig {
        max_iters: 100_000,
        ..MinimizeConfig::default()
    };
    group.bench_function("three_walls_1025", |b| {
        b.iter(|| minimize(&d, &p, &g, &cfg, Init::Profile(start.clone())).unwrap())
    });
    group.finish();
}

criterion_group!(benches, energy_and_gradient, full_solve);
criterion_main!(benches);
