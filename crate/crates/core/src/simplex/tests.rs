use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// Exhaustive search over the lattice {k/steps} on the simplex (n ≤ 3).
fn lattice_min(n: usize, steps: usize, f: impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let h = 1.0 / steps as f64;
    let mut best = (f64::INFINITY, vec![]);
    let mut visit = |w: Vec<f64>| {
        let v = f(&w);
        if v < best.0 {
            best = (v, w);
        }
    };
    match n {
        1 => visit(vec![1.0]),
        2 => (0..=steps).for_each(|i| visit(vec![i as f64 * h, 1.0 - i as f64 * h])),
        3 => {
            for i in 0..=steps {
                for k in 0..=(steps - i) {
                    let (a, b) = (i as f64 * h, k as f64 * h);
                    visit(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        _ => panic!("lattice search only for n <= 3"),
    }
    best
}

fn random_qp(rng: &mut ChaCha8Rng, n: usize, rows: usize) -> SimplexQp {
    let a = DMatrix::from_fn(rows, n, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(rows, |_, _| rng.random_range(-1.0..1.0));
    SimplexQp::from_residual(a, b, 1.0).unwrap()
}

#[test]
fn weights_invariants() {
    let w = SimplexWeights::new(vec![0.5, 0.5 + 1e-10, -1e-10]).unwrap();
    assert!((w.values().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
    assert!(w.values().iter().all(|&x| x >= 0.0));
    assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
    assert!(SimplexWeights::new(vec![1.5, -0.5]).is_err());
    assert!(SimplexWeights::new(vec![]).is_err());
}

#[test]
fn projection_onto_simplex() {
    assert_eq!(project_to_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
    assert_eq!(project_to_simplex(&[2.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
    let p = project_to_simplex(&[1.0, 1.0, -3.0]);
    assert_eq!(p, vec![0.5, 0.5, 0.0]);
}

#[test]
fn identity_gram_vertex_solution() {
    let qp = SimplexQp::new(DMatrix::identity(3, 3), DVector::from_vec(vec![1.0, 0.0, 0.0]), 1.0).unwrap();
    let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert_eq!(sol.weights.values(), &[1.0, 0.0, 0.0]);
    assert!(sol.objective.abs() < 1e-15);
}

#[test]
fn zero_problem_returns_uniform() {
    let qp = SimplexQp::new(DMatrix::zeros(4, 4), DVector::zeros(4), 0.0).unwrap();
    let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert_eq!(sol.weights, SimplexWeights::uniform(4));
}

#[test]
fn scalar_unit_weight_example() {
    let qp = build_unit_weight_qp(&[(vec![0.3], vec![vec![0.0], vec![1.0]])]).unwrap();
    let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert!((sol.weights.values()[0] - 0.7).abs() < 1e-12);
    assert!(sol.objective < 1e-20);
}

#[test]
fn perfect_fit_control() {
    let periods = vec![
        (vec![1.0, 2.0], vec![vec![0.0, 5.0], vec![1.0, 2.0], vec![3.0, -1.0]]),
        (vec![-1.0, 0.5], vec![vec![2.0, 2.0], vec![-1.0, 0.5], vec![0.0, 0.0]]),
    ];
    let qp = build_unit_weight_qp(&periods).unwrap();
    assert_eq!(qp.objective(&[0.0, 1.0, 0.0]), 0.0);
    let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert!((sol.weights.values()[1] - 1.0).abs() < 1e-9);
}

#[test]
fn time_weight_examples() {
    let qp = build_time_weight_qp(&[vec![vec![0.0], vec![2.0]]], &[vec![1.0]]).unwrap();
    let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert!((sol.weights.values()[0] - 0.5).abs() < 1e-12);
    assert!(sol.objective < 1e-20);

    // Stationary controls: every λ is optimal.
    let pre = vec![vec![vec![1.0, 2.0]; 3], vec![vec![0.5, -1.0]; 3]];
    let post = vec![vec![1.0, 2.0], vec![0.5, -1.0]];
    let qp = build_time_weight_qp(&pre, &post).unwrap();
    for w in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5]] {
        assert_eq!(qp.objective(&w), 0.0);
    }
    assert_eq!(solve_simplex_qp(&qp, &cfg()).unwrap().weights, SimplexWeights::uniform(3));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pre: Vec<Vec<Vec<f64>>> = (0..4)
        .map(|_| (0..3).map(|_| (0..2).map(|_| rng.random::<f64>()).collect()).collect())
        .collect();
    let post: Vec<Vec<f64>> = (0..4).map(|_| (0..2).map(|_| rng.random::<f64>()).collect()).collect();
    let qp = build_time_weight_qp(&pre, &post).unwrap();
    for s in 0..3 {
        let direct: f64 = (0..4)
            .map(|j| (0..2).map(|k| (post[j][k] - pre[j][s][k]).powi(2)).sum::<f64>())
            .sum::<f64>()
            / 4.0;
        let e = SimplexWeights::vertex(3, s);
        assert!((qp.objective(e.values()) - direct).abs() < 1e-14);
    }
}

#[test]
fn dimension_errors() {
    assert!(build_unit_weight_qp(&[(vec![1.0], vec![vec![1.0, 2.0]])]).is_err());
    assert!(build_time_weight_qp(&[vec![vec![1.0]]], &[]).is_err());
    assert!(SimplexQp::new(DMatrix::zeros(2, 3), DVector::zeros(2), 0.0).is_err());
}

#[test]
fn kkt_residual_at_known_points() {
    // Interior optimum: constant gradient.
    assert!(kkt_residual(&[0.5, 0.5], &[1.0, 1.0]) < 1e-15);
    // Vertex optimum: other coordinates have larger gradient.
    assert!(kkt_residual(&[1.0, 0.0], &[0.0, 2.0]) < 1e-15);
    // Non-optimal vertex.
    assert!(kkt_residual(&[1.0, 0.0], &[2.0, 0.0]) > 0.5);
}

#[test]
fn qp_matches_lattice_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..30 {
        let n = 2 + trial % 2;
        let qp = random_qp(&mut rng, n, 1 + trial % 4);
        let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
        let (lat, _) = lattice_min(n, 100, |w| qp.objective(w));
        // The lattice only bounds the optimum from above.
        assert!(sol.objective <= lat + 1e-8, "trial {trial}");
        for i in 0..n {
            assert!(sol.objective <= qp.objective(SimplexWeights::vertex(n, i).values()));
        }
        let g = qp.gradient(sol.weights.values());
        assert!(sol.kkt_residual <= 1e-10 * (1.0 + g.norm()));
    }
}

#[test]
fn qp_handles_underdetermined_larger_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let qp = random_qp(&mut rng, 25, 8);
        let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
        let g = qp.gradient(sol.weights.values());
        assert!(kkt_residual(sol.weights.values(), g.as_slice()) <= 1e-10 * (1.0 + g.norm()));
    }
}

#[test]
fn derivative_free_interior_quadratic() {
    let target = [0.2, 0.3, 0.5];
    let f = |w: &[f64]| -> Result<f64> { Ok(w.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum()) };
    let sol = solve_simplex_derivative_free(f, 3, &cfg()).unwrap();
    for (a, b) in sol.weights.values().iter().zip(&target) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn derivative_free_constant_returns_uniform() {
    let sol = solve_simplex_derivative_free(|_| Ok(2.0), 5, &cfg()).unwrap();
    assert_eq!(sol.weights, SimplexWeights::uniform(5));
    assert_eq!(sol.objective, 2.0);
}

#[test]
fn derivative_free_rejects_non_finite() {
    let err = solve_simplex_derivative_free(|w| Ok(if w[0] > 0.6 { f64::NAN } else { -w[0] }), 3, &cfg());
    assert!(matches!(err, Err(GscError::NonFiniteObjective(_))));
}

#[test]
fn derivative_free_beats_uniform_and_shrunk_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let qp = random_qp(&mut rng, 4, 3);
    let sol = solve_simplex_derivative_free(|w| Ok(qp.objective(w)), 4, &cfg()).unwrap();
    assert!(sol.objective <= qp.objective(SimplexWeights::uniform(4).values()));
    for i in 0..4 {
        let w: Vec<f64> = (0..4).map(|k| if k == i { 1.0 - 1e-6 + 0.25e-6 } else { 0.25e-6 }).collect();
        assert!(sol.objective <= qp.objective(&w));
    }
    let exact = solve_simplex_qp(&qp, &cfg()).unwrap();
    assert!(sol.objective - exact.objective < 1e-5);
}

#[test]
fn derivative_free_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let qp = random_qp(&mut rng, 6, 4);
    let run = || solve_simplex_derivative_free(|w| Ok(qp.objective(w)), 6, &cfg()).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn qp_output_is_on_the_simplex_and_deterministic(seed in any::<u64>(), n in 1usize..8, rows in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_qp(&mut rng, n, rows);
        let a = solve_simplex_qp(&qp, &cfg()).unwrap();
        let b = solve_simplex_qp(&qp, &cfg()).unwrap();
        prop_assert_eq!(&a.weights, &b.weights);
        prop_assert!(a.weights.values().iter().all(|&x| x >= 0.0));
        prop_assert!((a.weights.values().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn qp_beats_random_feasible_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qp = random_qp(&mut rng, 5, 3);
        let sol = solve_simplex_qp(&qp, &cfg()).unwrap();
        for _ in 0..50 {
            let raw: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
            prop_assert!(sol.objective <= qp.objective(&w) + 1e-12);
        }
    }
}
