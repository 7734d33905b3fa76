//! Fixtures shared by the benchmarks.

use gsc_core::spaces::sample::random_point;
use gsc_core::{simulate, ObjectPoint, Panel, Scenario, SimConfig, SimplexQp, SpaceDescriptor};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Simulated panel with `j` controls.
pub fn panel(scenario: Scenario, j: usize) -> Panel {
    let cfg = SimConfig {
        j,
        ..SimConfig::new(scenario, 1)
    };
    simulate(&cfg).expect("simulated panel").panel
}

/// Dense least-squares QP over the `n`-simplex with `rows` residuals.
pub fn random_qp(n: usize, rows: usize, seed: u64) -> SimplexQp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(rows, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(rows, |_, _| rng.random_range(-1.0..1.0));
    SimplexQp::from_residual(a, b, 1.0 / rows as f64).expect("qp")
}

/// `n` random points on the positive orthant of the sphere in `R^d`.
pub fn sphere_points(d: usize, n: usize, seed: u64) -> Vec<ObjectPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = SpaceDescriptor::sphere(d).into_shared();
    (0..n).map(|_| random_point(&s, &mut rng)).collect()
}
