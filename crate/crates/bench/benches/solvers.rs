use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use steadysqueeze::{
    liouvillian, perturb_model, squeezing_report, steady_state, Engine, SolverConfig,
};
use steadysqueeze_bench::{dicke, xyz_full, xyz_manifold};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("liouvillian");
    for n in [4, 6, 8] {
        let m = xyz_full(n);
        g.bench_with_input(BenchmarkId::new("xyz", n), &m, |b, m| {
            b.iter(|| liouvillian(black_box(&m.lindblad)).unwrap())
        });
    }
    g.finish();
}

fn steady_states(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("steady_state");
    g.sample_size(10);
    for n in [4, 6] {
        let m = xyz_full(n);
        g.bench_with_input(BenchmarkId::new("xyz", n), &m, |b, m| {
            b.iter(|| steady_state(&m.lindblad, &cfg).unwrap())
        });
    }
    for n in [50, 200] {
        let m = dicke(n, 0.2);
        g.bench_with_input(BenchmarkId::new("dicke", n), &m, |b, m| {
            b.iter(|| steady_state(&m.lindblad, &cfg).unwrap())
        });
    }
    g.finish();
}

fn perturbation(c: &mut Criterion) {
    let mut g = c.benchmark_group("perturbation");
    for (name, m) in [("xyz", xyz_manifold(100)), ("dicke", dicke(100, 0.05))] {
        for engine in [Engine::General, Engine::Commuting] {
            let id = BenchmarkId::new(format!("{name}/{engine:?}"), 100);
            g.bench_with_input(id, &m, |b, m| {
                b.iter(|| perturb_model(&m.lindblad, engine).unwrap())
            });
        }
    }
    g.finish();
}

fn squeezing(c: &mut Criterion) {
    let m = xyz_full(6);
    let ss = steady_state(&m.lindblad, &SolverConfig::default()).unwrap();
    c.bench_function("squeezing_report/xyz/6", |b| {
        b.iter(|| squeezing_report(black_box(&ss.rho), &m.collective).unwrap())
    });
}

criterion_group!(benches, assembly, steady_states, perturbation, squeezing);
criterion_main!(benches);
