use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rwl_bench::{random_wave_state, slab};
use rwl_core::cases::{kernel_prepared, limit_preset, ReferenceFluid};
use rwl_core::kernel::project_to_kernel;
use rwl_core::ns::{NsConfig, NsSolver};
use rwl_core::qg::{QgOptions, QgSolver};
use rwl_core::transform::{forward, inverse};
use rwl_core::wave::{eigensystem, Propagator};
use std::hint::black_box;

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft");
    for n in [64, 128] {
        let g = slab(n, 8);
        let f = random_wave_state(&g, 1).s;
        group.bench_with_input(BenchmarkId::new("round_trip", n), &f, |b, f| {
            b.iter(|| inverse(&forward(black_box(f)).unwrap()))
        });
    }
    group.finish();
}

fn symbol(c: &mut Criterion) {
    c.bench_function("eigensystem", |b| b.iter(|| eigensystem(black_box([1.3, -0.7]), black_box(2.0 * std::f64::consts::PI))));
}

fn propagator(c: &mut Criterion) {
    let g = slab(64, 8);
    let y = random_wave_state(&g, 2);
    let cached = Propagator::cached(&g);
    let fresh = Propagator::new(&g);
    let mut group = c.benchmark_group("propagate_64x64x8");
    group.sample_size(20);
    group.bench_function("cached", |b| b.iter(|| cached.propagate(black_box(&y), 1.0, 0.1).unwrap()));
    group.bench_function("uncached", |b| b.iter(|| fresh.propagate(black_box(&y), 1.0, 0.1).unwrap()));
    group.finish();
}

fn projection(c: &mut Criterion) {
    let g = slab(64, 8);
    let y = random_wave_state(&g, 3);
    c.bench_function("project_to_kernel_64x64x8", |b| b.iter(|| project_to_kernel(black_box(&y.s), &y.v).unwrap()));
}

fn qg_step(c: &mut Criterion) {
    let plane = std::sync::Arc::new(slab(256, 4).plane());
    let q0 = limit_preset("vortex-pair", &plane, 1.0, 1.0, 2.5, 0).unwrap();
    let mut group = c.benchmark_group("qg");
    group.sample_size(20);
    group.bench_function("step_256", |b| {
        b.iter_batched(
            || QgSolver::new(&q0, QgOptions::default()).unwrap(),
            |mut s| s.step(0.01).unwrap(),
            criterion::BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn ns_step(c: &mut Criterion) {
    let g = slab(64, 8);
    let cfg = NsConfig::default();
    let prop = Propagator::cached(&g);
    let reference = ReferenceFluid::default().state(&g, cfg.eps).unwrap();
    let plane = std::sync::Arc::new(g.plane());
    let prepared = kernel_prepared(&g, &limit_preset("vortex-pair", &plane, 1.0, 1.0, 2.5, 0).unwrap(), cfg.eps).unwrap();
    let mut group = c.benchmark_group("ns_step_64x64x8");
    group.sample_size(10);
    for (name, st) in [("reference", &reference), ("kernel_prepared", &prepared)] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || NsSolver::new(st, &cfg, Some(&prop)).unwrap(),
                |mut s| s.step(cfg.dt).unwrap(),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, symbol, propagator, projection, qg_step, ns_step);
criterion_main!(benches);
