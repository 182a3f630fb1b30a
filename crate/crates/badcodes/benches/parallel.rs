//! Compares the data-parallel library paths with plain sequential loops over
//! the same work. Build with `--no-default-features` to benchmark the
//! sequential fallback of the library paths themselves.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use badcodes::density_evolution::{sim_de_sweep, sim_de_with, SimDeOptions};
use badcodes::ensemble::sample_graph;
use badcodes::relay::{run_campaign, soft_df_bp_trial, GraphSource, RelayParams};
use badcodes::{EdgeDistribution, Stream};

fn ensemble() -> EdgeDistribution {
    EdgeDistribution::from_pairs(
        &[(2, 0.2289), (3, 0.04532), (4, 0.2361), (23, 0.233), (24, 0.03178), (100, 0.2249)],
        &[(10, 1.0)],
    )
    .unwrap()
}

fn campaign(c: &mut Criterion) {
    let ed = ensemble();
    let p = RelayParams::new(0.5, 0.82, 0.9, 0.212).unwrap();
    let (n, t, trials, seed) = (2000, 50, 8, 11);
    let mut group = c.benchmark_group("relay_campaign");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("library", trials), |b| {
        b.iter(|| run_campaign(GraphSource::Ensemble(&ed, n), &p, t, trials, seed).unwrap())
    });
    group.bench_function(BenchmarkId::new("sequential", trials), |b| {
        b.iter(|| {
            let root = Stream::new(seed);
            (0..trials)
                .map(|k| {
                    let mut rng = root.split(k as u64);
                    let g = sample_graph(&ed, n, &mut rng).unwrap();
                    soft_df_bp_trial(&g, &p, t, &mut rng).unwrap().rates
                })
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let ed = ensemble();
    let grid: Vec<f64> = (0..16).map(|k| 0.15 + 0.005 * k as f64).collect();
    let opts = SimDeOptions { t_max: 500, tol: 1e-12 };
    let mut group = c.benchmark_group("sim_de_sweep");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("library", grid.len()), |b| {
        b.iter(|| sim_de_sweep(&ed, 0.5, 0.82, black_box(&grid), opts).unwrap())
    });
    group.bench_function(BenchmarkId::new("sequential", grid.len()), |b| {
        b.iter(|| {
            black_box(&grid)
                .iter()
                .map(|&dh| sim_de_with(&ed, 0.5, 0.82, dh, opts).unwrap().pe_final)
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

criterion_group!(benches, campaign, sweep);
criterion_main!(benches);
