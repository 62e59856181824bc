use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use metapop_core::fd::{steady_state_solve, FdOptions};
use metapop_core::{par, solve, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn param_sets(n: usize) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..n)
        .map(|_| ModelParams {
            r1: rng.gen_range(0.8..2.0),
            r2: rng.gen_range(0.8..2.0),
            g1: rng.gen_range(0.3..1.5),
            g2: rng.gen_range(0.3..1.5),
            kappa1: rng.gen_range(0.5..2.0),
            kappa2: rng.gen_range(0.5..2.0),
            m1: rng.gen_range(0.1..1.0),
            m2: rng.gen_range(0.1..1.0),
            theta: rng.gen_range(0.5..1.5),
        })
        .collect()
}

fn ess_sweep(c: &mut Criterion) {
    let sets = param_sets(256);
    let mut g = c.benchmark_group("ess_sweep");
    g.bench_function(BenchmarkId::new("seq", sets.len()), |b| {
        b.iter(|| par::map_seq(black_box(&sets), |p| solve(p).is_ok()))
    });
    g.bench_function(BenchmarkId::new("par", sets.len()), |b| {
        b.iter(|| par::map_par(black_box(&sets), |p| solve(p).is_ok()))
    });
    g.finish();
}

fn fd_sweep(c: &mut Criterion) {
    let p = ModelParams::symmetric(1.5, 0.5, 1.0, 1.2, 1.0);
    let opts: Vec<FdOptions> = [0.4, 0.3, 0.25, 0.2]
        .iter()
        .map(|&eps| FdOptions::new(&p, eps).with_grid(3.0, 801))
        .collect();
    let mut g = c.benchmark_group("fd_sweep");
    g.sample_size(10);
    g.bench_function("seq", |b| b.iter(|| par::map_seq(&opts, |o| steady_state_solve(&p, o).is_ok())));
    g.bench_function("par", |b| b.iter(|| par::map_par(&opts, |o| steady_state_solve(&p, o).is_ok())));
    g.finish();
}

criterion_group!(benches, ess_sweep, fd_sweep);
criterion_main!(benches);
