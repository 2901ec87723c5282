//! Benchmarks for the numerical kernels: FDTD stepping, geometry
//! rasterization, plane-wave band solves, and the slab dispersion solve.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use phc_lab::bands::{te_bands, BandsConfig, K_POINT};
use phc_lab::fdtd::{
    rasterize, run_fdtd, Boundaries, Grid2D, Monitor, MonitorComponent, SimConfig, SourceConfig,
};
use phc_lab::geometry::{generate_1d_holes, Nanobeam1DSpec};
use phc_lab::wave1d::slab_neff;

fn bench_fdtd_steps(c: &mut Criterion) {
    let grid = Grid2D::vacuum(20.0, 120, 80).unwrap();
    let cfg = SimConfig {
        steps: 500,
        courant: 0.95,
        boundaries: Boundaries::Pml { cells: 12 },
        source: Some(SourceConfig {
            x_nm: 1200.0,
            y_nm: 800.0,
            f_thz: 400.0,
            bandwidth_thz: 40.0,
            amplitude: 1.0,
        }),
        monitors: vec![Monitor {
            x_nm: 1600.0,
            y_nm: 800.0,
            component: MonitorComponent::Hz,
        }],
        snapshot_at: None,
        track_energy: false,
    };
    c.bench_function("fdtd_500_steps_120x80_pml", |b| {
        b.iter(|| run_fdtd(black_box(&grid), black_box(&cfg)).unwrap())
    });
}

fn bench_rasterize(c: &mut Criterion) {
    let holes = generate_1d_holes(&Nanobeam1DSpec::new(269.0)).unwrap();
    c.bench_function("rasterize_nanobeam_dx10", |b| {
        b.iter(|| rasterize(black_box(&holes), 1.96, 10.0, 250.0).unwrap())
    });
}

fn bench_te_bands(c: &mut Criterion) {
    let mut group = c.benchmark_group("te_bands_k_point");
    for n_pw in [5, 7, 9] {
        let mut cfg = BandsConfig::new(65.0 / 252.0, 4.0);
        cfg.n_pw = n_pw;
        group.bench_with_input(BenchmarkId::from_parameter(n_pw), &cfg, |b, cfg| {
            b.iter(|| te_bands(black_box(cfg), K_POINT).unwrap())
        });
    }
    group.finish();
}

fn bench_slab_neff(c: &mut Criterion) {
    c.bench_function("slab_neff_diamond_160nm", |b| {
        b.iter(|| slab_neff(black_box(2.41), 1.0, 160.0, 737.0).unwrap())
    });
}

criterion_group!(
    benches,
    bench_fdtd_steps,
    bench_rasterize,
    bench_te_bands,
    bench_slab_neff
);
criterion_main!(benches);
