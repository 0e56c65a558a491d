//! Sequential vs rayon execution of the data-parallel kernels.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbitforge::group::HalfPlanePoint;
use orbitforge::operators::{carleman_scan_with, commutator_residuals_with, IndexWindow};
use orbitforge::orbit::{frame_flow_with, OrbitSampler};
use orbitforge::{Exec, SeriesParam};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn commutator_scan(c: &mut Criterion) {
    let mut g = c.benchmark_group("commutator_residuals");
    let w = IndexWindow::new(256, 2).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 256), |b| {
            b.iter(|| commutator_residuals_with(black_box(-8.0), w, exec).unwrap())
        });
    }
    g.finish();
}

fn orbit_grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("orbit_grid");
    let s = SeriesParam::complementary(0.0).unwrap();
    let grid: Vec<HalfPlanePoint> = (0..64)
        .map(|i| HalfPlanePoint::new(-0.8 + 0.025 * i as f64, 0.6 + 0.01 * i as f64).unwrap())
        .collect();
    for (name, exec) in MODES {
        let sampler = OrbitSampler::new(s, IndexWindow::new(128, 2).unwrap())
            .unwrap()
            .with_exec(exec);
        // warm the propagator cache so only sampling is timed
        sampler.grid(&grid[..1]).unwrap();
        g.bench_function(BenchmarkId::new(name, grid.len()), |b| {
            b.iter(|| sampler.grid(black_box(&grid)).unwrap())
        });
    }
    g.finish();
}

fn frame_flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("frame_flow");
    g.sample_size(10);
    let s = SeriesParam::complementary(0.0).unwrap();
    let w = IndexWindow::new(64, 1).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| frame_flow_with(s, w, black_box([0.35, 0.0, 0.0]), 0.5, 1000, exec).unwrap())
        });
    }
    g.finish();
}

fn carleman(c: &mut Criterion) {
    let mut g = c.benchmark_group("carleman_scan");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 1_000_000), |b| {
            b.iter(|| carleman_scan_with(black_box(-8.0), 1_000_000, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, commutator_scan, orbit_grid, frame_flow, carleman);
criterion_main!(benches);
