use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use smcf_bench::reference_data;
use smcf_core::evolution::{step, EvolutionConfig};
use smcf_core::gauge::{solve_elliptic_system, EllipticConfig};
use smcf_core::oracle::{circle, graph_from_psi, smcf_step};
use smcf_core::spectral::{laplacian, sobolev_norm};

fn spectral(c: &mut Criterion) {
    let mut g = c.benchmark_group("spectral");
    for n in [32, 64, 128] {
        let psi = reference_data(2, n);
        g.bench_with_input(BenchmarkId::new("laplacian_2d", n), &psi, |b, p| {
            b.iter(|| laplacian(black_box(p)))
        });
        g.bench_with_input(BenchmarkId::new("sobolev_norm_2d", n), &psi, |b, p| {
            b.iter(|| sobolev_norm(black_box(p), 2.0))
        });
    }
    g.finish();
}

fn elliptic(c: &mut Criterion) {
    let mut g = c.benchmark_group("elliptic");
    g.sample_size(10);
    for (d, n) in [(2, 32), (2, 64), (3, 16)] {
        let psi = reference_data(d, n);
        let cfg = EllipticConfig::default();
        g.bench_function(BenchmarkId::new(format!("solve_d{d}"), n), |b| {
            b.iter(|| solve_elliptic_system(black_box(&psi), &cfg).unwrap())
        });
    }
    g.finish();
}

fn evolution(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolution");
    g.sample_size(10);
    let psi = reference_data(2, 32);
    let cfg = EvolutionConfig::for_grid(psi.grid(), 1.0);
    let state = solve_elliptic_system(&psi, &cfg.elliptic).unwrap();
    g.bench_function("split_step_32", |b| {
        b.iter(|| step(black_box(&psi), &state, &cfg, cfg.dt, 0.0).unwrap())
    });
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    let ring = circle(1.0, 256).unwrap();
    g.bench_function("rk4_circle_256", |b| {
        b.iter(|| smcf_step(black_box(&ring), 1e-4).unwrap())
    });
    let surface = graph_from_psi(&reference_data(2, 32)).unwrap();
    g.bench_function("rk4_graph_32", |b| {
        b.iter(|| smcf_step(black_box(&surface), 1e-3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, spectral, elliptic, evolution, oracle);
criterion_main!(benches);
