use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gsc_bench::{panel, random_qp, sphere_points};
use gsc_core::{
    estimate_gsc, estimate_gsdid, placebo_test, solve_simplex_qp, weighted_frechet_mean,
    PlaceboMethod, Scenario, SimplexWeights, SolverConfig,
};

fn simplex(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("solve_simplex_qp");
    for n in [5, 20, 100] {
        let qp = random_qp(n, 2 * n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &qp, |b, qp| {
            b.iter(|| solve_simplex_qp(qp, &cfg).unwrap())
        });
    }
    g.finish();
}

fn sphere_mean(c: &mut Criterion) {
    let pts = sphere_points(3, 20, 2);
    let refs: Vec<_> = pts.iter().collect();
    let w = SimplexWeights::uniform(refs.len());
    c.bench_function("sphere_frechet_mean_20", |b| {
        b.iter(|| weighted_frechet_mean(&refs, &w).unwrap())
    });
}

fn estimators(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let network = panel(Scenario::Network, 20);
    let spd = panel(Scenario::Spd, 20);
    c.bench_function("gsc_network_j20", |b| b.iter(|| estimate_gsc(&network, &cfg).unwrap()));
    c.bench_function("gsc_spd_j20", |b| b.iter(|| estimate_gsc(&spd, &cfg).unwrap()));
    c.bench_function("gsdid_network_j20", |b| b.iter(|| estimate_gsdid(&network, &cfg).unwrap()));

    let sphere = panel(Scenario::Sphere, 5);
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("gsc_sphere_j5", |b| b.iter(|| estimate_gsc(&sphere, &cfg).unwrap()));
    g.bench_function("placebo_gsc_network_j20", |b| {
        b.iter(|| placebo_test(&network, PlaceboMethod::Gsc, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, simplex, sphere_mean, estimators);
criterion_main!(benches);
