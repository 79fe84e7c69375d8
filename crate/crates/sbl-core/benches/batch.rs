//! Parallel vs sequential batch evaluation of the structure-equation residual
//! and the fiber quadrature, the two data-parallel inner loops of the engine.
//!
//! `map_samples` uses rayon under the default `parallel` feature while
//! `map_samples_seq` is always sequential; benchmarking both in one binary
//! shows the speedup of the parallel path on identical work.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sbl_core::bundle::adapted_frame;
use sbl_core::eds::{build_system, rho_family};
use sbl_core::fiber::{c_of, fiber_integrate, FiberGrid};
use sbl_core::forms::restricted_residual;
use sbl_core::par::{map_samples, map_samples_seq};
use sbl_core::sampling::sample_points;
use sbl_core::ChartMetric;

fn bench_structure_residuals(c: &mut Criterion) {
    let m = ChartMetric::perturbed(0.05);
    let sys = build_system(&m, 1.0).unwrap();
    let fam = rho_family(&m).unwrap();
    let samples = sample_points(&m, 1.0, 32, 42).unwrap();
    let lhs = sys.alpha[2].ext_derivative();
    let rhs = sys
        .theta
        .wedge(&fam.gamma)
        .unwrap()
        .add(&sys.alpha[0].wedge(&fam.rho).unwrap());

    let work = |p: &sbl_core::bundle::BundlePoint| {
        let frame = adapted_frame(&m, p).unwrap();
        restricted_residual(&lhs, &rhs, &frame).unwrap()
    };

    let mut group = c.benchmark_group("structure_residual_batch");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", samples.len()), &samples, |b, s| {
        b.iter(|| map_samples(s, work))
    });
    group.bench_with_input(BenchmarkId::new("sequential", samples.len()), &samples, |b, s| {
        b.iter(|| map_samples_seq(s, work))
    });
    group.finish();
}

fn bench_fiber_battery(c: &mut Criterion) {
    let m = ChartMetric::heisenberg();
    let grid = FiberGrid::default();
    let xs: Vec<[f64; 3]> = sample_points(&m, 1.0, 16, 7)
        .unwrap()
        .into_iter()
        .map(|p| p.x)
        .collect();
    let work = |x: &[f64; 3]| {
        let pack = m.curvature_pack(x).unwrap();
        fiber_integrate(&m, 1.0, x, &grid, |u| Ok(c_of(&pack, u, 1.0))).unwrap()
    };
    let mut group = c.benchmark_group("fiber_average_batch");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", xs.len()), &xs, |b, s| {
        b.iter(|| map_samples(s, work))
    });
    group.bench_with_input(BenchmarkId::new("sequential", xs.len()), &xs, |b, s| {
        b.iter(|| map_samples_seq(s, work))
    });
    group.finish();
}

criterion_group!(benches, bench_structure_residuals, bench_fiber_battery);
criterion_main!(benches);
