use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::sample::random_point;
use super::*;

fn shared(s: SpaceDescriptor) -> Arc<SpaceDescriptor> {
    s.into_shared()
}

fn point(space: &Arc<SpaceDescriptor>, data: Vec<f64>) -> ObjectPoint {
    ObjectPoint::validated(space, data).unwrap()
}

fn diag(m: usize, d: &[f64]) -> Vec<f64> {
    let mut a = vec![0.0; m * m];
    for i in 0..m {
        a[i * m + i] = d[i];
    }
    a
}

fn all_spaces() -> Vec<Arc<SpaceDescriptor>> {
    vec![
        shared(SpaceDescriptor::laplacian(4)),
        shared(SpaceDescriptor::sphere(3)),
        shared(SpaceDescriptor::spd_frobenius(3)),
        shared(SpaceDescriptor::spd_log_euclidean(3)),
        shared(SpaceDescriptor::spd_power(3, 0.5).unwrap()),
        shared(SpaceDescriptor::spd_log_cholesky(3)),
        shared(SpaceDescriptor::wasserstein1d(21)),
        shared(SpaceDescriptor::l2function(vec![0.0, 0.2, 0.5, 0.9, 1.0]).unwrap()),
    ]
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn descriptor_validation() {
    assert!(SpaceDescriptor::spd_power(2, 0.0).is_err());
    assert!(SpaceDescriptor::new(SpaceKind::Laplacian, 3, Some(1.0), None).is_err());
    assert!(SpaceDescriptor::wasserstein1d_with_grid(vec![0.2, 0.1]).is_err());
    assert!(SpaceDescriptor::wasserstein1d_with_grid(vec![0.0, 0.5]).is_err());
    assert!(SpaceDescriptor::l2function(vec![0.0, 0.0]).is_err());
    assert_eq!(SpaceKind::from_name("spd_log_cholesky"), Some(SpaceKind::SpdLogCholesky));
    let w = SpaceDescriptor::wasserstein1d(101);
    let total: f64 = w.quadrature().iter().sum();
    assert!((total - 1.0).abs() < 1e-14);
}

#[test]
fn identity_is_not_a_laplacian_but_zero_is() {
    let s = shared(SpaceDescriptor::laplacian(3));
    let eye = ObjectPoint::new(&s, diag(3, &[1.0, 1.0, 1.0])).unwrap();
    assert!(validate_point(&eye).is_err());
    let zero = ObjectPoint::new(&s, vec![0.0; 9]).unwrap();
    assert!(validate_point(&zero).is_ok());
}

#[test]
fn sphere_validation() {
    let s = shared(SpaceDescriptor::sphere(3));
    assert!(validate_point(&ObjectPoint::new(&s, vec![1.0, 0.0, 0.0]).unwrap()).is_ok());
    assert!(validate_point(&ObjectPoint::new(&s, vec![0.5, 0.5, 0.5]).unwrap()).is_err());
}

#[test]
fn l2_trapezoid_distance() {
    let s = shared(SpaceDescriptor::l2function(vec![0.0, 1.0]).unwrap());
    let a = point(&s, vec![0.0, 0.0]);
    let b = point(&s, vec![3.0, 4.0]);
    // 0.5·9 + 0.5·16
    assert!((distance(&a, &b).unwrap() - 12.5_f64.sqrt()).abs() < 1e-14);
    let c1 = point(&s, vec![2.0, 2.0]);
    let c2 = point(&s, vec![-1.5, -1.5]);
    assert!((distance(&c1, &c2).unwrap() - 3.5).abs() < 1e-14);
}

#[test]
fn l2_constant_functions_scale_with_domain_length() {
    let s = shared(SpaceDescriptor::l2function(vec![0.0, 0.3, 0.4, 1.0]).unwrap());
    let a = point(&s, vec![1.0; 4]);
    let b = point(&s, vec![3.0; 4]);
    assert!((distance(&a, &b).unwrap() - 2.0).abs() < 1e-14);
    let long = shared(SpaceDescriptor::l2function(vec![0.0, 4.0]).unwrap());
    let a = point(&long, vec![1.0; 2]);
    let b = point(&long, vec![3.0; 2]);
    assert!((distance(&a, &b).unwrap() - 4.0).abs() < 1e-14);
}

#[test]
fn sphere_orthogonal_distance() {
    let s = shared(SpaceDescriptor::sphere(4));
    let e1 = point(&s, vec![1.0, 0.0, 0.0, 0.0]);
    let e2 = point(&s, vec![0.0, 1.0, 0.0, 0.0]);
    assert!((distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-15);
}

fn normal_quantiles(space: &Arc<SpaceDescriptor>, mean: f64, sd: f64) -> ObjectPoint {
    let n = Normal::new(mean, sd).unwrap();
    let q = space.grid().unwrap().iter().map(|&p| n.inverse_cdf(p)).collect();
    point(space, q)
}

#[test]
fn wasserstein_location_shift() {
    let s = shared(SpaceDescriptor::wasserstein1d(101));
    let a = normal_quantiles(&s, 0.0, 1.0);
    for c in [0.3, -2.0, 5.5] {
        let b = point(&s, a.data().iter().map(|x| x + c).collect());
        assert!((distance(&a, &b).unwrap() - c.abs()).abs() < 1e-12);
    }
}

#[test]
fn log_euclidean_distance_and_midpoint() {
    let s = shared(SpaceDescriptor::spd_log_euclidean(2));
    let e2 = std::f64::consts::E.powi(2);
    let i = point(&s, diag(2, &[1.0, 1.0]));
    let b = point(&s, diag(2, &[e2, e2]));
    assert!((distance(&i, &b).unwrap() - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
    let mid = geodesic_eval(&i, &b, 0.5).unwrap();
    let e = std::f64::consts::E;
    assert!(max_abs_diff(mid.data(), &diag(2, &[e, e])) < 1e-12);
}

#[test]
fn geodesic_endpoints_and_sphere_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for s in all_spaces() {
        let a = random_point(&s, &mut rng);
        let b = random_point(&s, &mut rng);
        assert_eq!(geodesic_eval(&a, &b, 0.0).unwrap(), a);
        assert_eq!(geodesic_eval(&a, &b, 1.0).unwrap(), b);
        assert!(geodesic_eval(&a, &b, 1.5).is_err());
    }
    let s = shared(SpaceDescriptor::sphere(3));
    let e1 = point(&s, vec![1.0, 0.0, 0.0]);
    let e2 = point(&s, vec![0.0, 1.0, 0.0]);
    let m = geodesic_eval(&e1, &e2, 0.5).unwrap();
    assert!(max_abs_diff(m.data(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]) < 1e-15);
}

#[test]
fn antipodal_geodesic_is_rejected() {
    let s = shared(SpaceDescriptor::sphere(2));
    let a = ObjectPoint::new(&s, vec![1.0, 0.0]).unwrap();
    let b = ObjectPoint::new(&s, vec![-1.0, 0.0]).unwrap();
    assert!(matches!(geodesic_eval(&a, &b, 0.5), Err(GscError::Antipodal)));
    assert!(matches!(sphere_log(&a, &b), Err(GscError::Antipodal)));
}

#[test]
fn space_mismatch_is_an_error() {
    let a = point(&shared(SpaceDescriptor::sphere(3)), vec![1.0, 0.0, 0.0]);
    let b = point(&shared(SpaceDescriptor::sphere(2)), vec![1.0, 0.0]);
    assert!(matches!(distance(&a, &b), Err(GscError::SpaceMismatch(_))));
}

#[test]
fn mean_of_identical_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for s in all_spaces() {
        let p = random_point(&s, &mut rng);
        let pts = [&p, &p, &p];
        let w = SimplexWeights::new(vec![0.2, 0.5, 0.3]).unwrap();
        let m = weighted_frechet_mean(&pts, &w).unwrap();
        assert!(distance(&m, &p).unwrap() < 1e-9, "{}", s.kind());
    }
}

#[test]
fn wasserstein_mean_of_normals() {
    let s = shared(SpaceDescriptor::wasserstein1d(101));
    let a = normal_quantiles(&s, 0.0, 1.0);
    let b = normal_quantiles(&s, 2.0, 1.0);
    let m = weighted_frechet_mean(&[&a, &b], &SimplexWeights::uniform(2)).unwrap();
    let target = normal_quantiles(&s, 1.0, 1.0);
    assert!(max_abs_diff(m.data(), target.data()) < 1e-12);
}

/// Brute-force minimizer of Σ w_j arccos²(ν'z_j) on a spherical grid.
fn grid_mean(points: &[Vec<f64>], weights: &[f64], steps: usize) -> Vec<f64> {
    let mut best = (f64::INFINITY, vec![]);
    for i in 0..=steps {
        let theta = FRAC_PI_2 * i as f64 / steps as f64;
        for k in 0..=steps {
            let phi = FRAC_PI_2 * k as f64 / steps as f64;
            let nu = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let f: f64 = points
                .iter()
                .zip(weights)
                .map(|(z, w)| {
                    let c = (nu[0] * z[0] + nu[1] * z[1] + nu[2] * z[2]).clamp(-1.0, 1.0);
                    w * c.acos().powi(2)
                })
                .sum();
            if f < best.0 {
                best = (f, nu.to_vec());
            }
        }
    }
    best.1
}

#[test]
fn sphere_mean_matches_grid_search() {
    let s = shared(SpaceDescriptor::sphere(3));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<ObjectPoint> = (0..4).map(|_| random_point(&s, &mut rng)).collect();
    let w = SimplexWeights::new(vec![0.1, 0.4, 0.3, 0.2]).unwrap();
    let refs: Vec<&ObjectPoint> = pts.iter().collect();
    let m = weighted_frechet_mean(&refs, &w).unwrap();
    let raw: Vec<Vec<f64>> = pts.iter().map(|p| p.data().to_vec()).collect();
    let g = grid_mean(&raw, w.values(), 600);
    // Grid spacing is π/1200.
    assert!(max_abs_diff(m.data(), &g) < 3e-3);
    let grad = refs.iter().zip(w.values()).fold(vec![0.0; 3], |mut acc, (p, wj)| {
        let l = sphere_log(&m, p).unwrap();
        for (a, x) in acc.iter_mut().zip(&l.vector) {
            *a += wj * x;
        }
        acc
    });
    assert!(sphere::norm(&grad) <= TOL_MEAN);
}

#[test]
fn transport_examples() {
    let s = shared(SpaceDescriptor::spd_power(2, 2.0).unwrap());
    let a = point(&s, diag(2, &[1.0, 1.0]));
    let b = point(&s, diag(2, &[2.0, 2.0]));
    let o = point(&s, diag(2, &[3.0, 3.0]));
    let r = transport(&a, &b, &o, false).unwrap();
    // (3² + 2² − 1²)^{1/2}
    let v = 12.0_f64.sqrt();
    assert!(max_abs_diff(r.point.data(), &diag(2, &[v, v])) < 1e-12);
    assert!(r.repair.is_none());

    let w = shared(SpaceDescriptor::wasserstein1d(101));
    let unif = |lo: f64| point(&w, w.grid().unwrap().iter().map(|p| lo + p).collect());
    let r = transport(&unif(0.0), &unif(2.0), &unif(5.0), false).unwrap();
    assert!(max_abs_diff(r.point.data(), unif(7.0).data()) < 1e-12);
}

#[test]
fn transport_identity_displacement() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for s in all_spaces() {
        let a = random_point(&s, &mut rng);
        let o = random_point(&s, &mut rng);
        let r = transport(&a, &a, &o, false).unwrap();
        assert!(distance(&r.point, &o).unwrap() < 1e-10, "{}", s.kind());
    }
}

#[test]
fn laplacian_transport_repair_protocol() {
    let s = shared(SpaceDescriptor::laplacian(2));
    let lap = |w: f64| point(&s, vec![w, -w, -w, w]);
    // ω + β − α has off-diagonal +0.5: far beyond the budget.
    let err = transport(&lap(1.0), &lap(0.5), &lap(0.0), true).unwrap_err();
    assert!(matches!(err, GscError::RepairBudget(_)));
    let err = transport(&lap(1.0), &lap(0.5), &lap(0.0), false).unwrap_err();
    assert!(matches!(err, GscError::InvalidPoint(_)));
    // A small exit is clipped and reported.
    let s3 = shared(SpaceDescriptor::laplacian(3));
    let lap3 = |a: f64, b: f64, c: f64| point(&s3, vec![a + b, -a, -b, -a, a + c, -c, -b, -c, b + c]);
    let r = transport(&lap3(1.0, 1.0, 1.0), &lap3(1.0 - 1.1e-6, 1.0, 1.0), &lap3(1e-7, 5.0, 5.0), true).unwrap();
    let note = r.repair.expect("repair recorded");
    assert_eq!(note.kind, RepairKind::LaplacianClip);
    assert!(validate_point(&r.point).is_ok());
}

#[test]
fn spd_cone_exit_repair() {
    let s = shared(SpaceDescriptor::spd_frobenius(2));
    let c = FlatCoordinates {
        vector: vec![1.0, 0.0, 0.0, -1e-9],
    };
    assert!(flat_restore(&c, &s, false).is_err());
    let r = flat_restore(&c, &s, true).unwrap();
    assert_eq!(r.repair.unwrap().kind, RepairKind::EigenvalueClip);
    assert!(validate_point(&r.point).is_ok());
    let far = FlatCoordinates {
        vector: vec![1.0, 0.0, 0.0, -0.5],
    };
    assert!(matches!(flat_restore(&far, &s, true), Err(GscError::RepairBudget(_))));
}

#[test]
fn quantile_restore_projects_when_allowed() {
    let s = shared(SpaceDescriptor::wasserstein1d(4));
    let c = FlatCoordinates {
        vector: vec![0.0, 1.0, 0.5, 2.0],
    };
    assert!(flat_restore(&c, &s, false).is_err());
    let r = flat_restore(&c, &s, true).unwrap();
    assert_eq!(r.point.data(), &[0.0, 0.75, 0.75, 2.0]);
    assert_eq!(r.repair.unwrap().kind, RepairKind::Isotonic);
}

#[test]
fn chart_examples() {
    let s = shared(SpaceDescriptor::spd_log_euclidean(3));
    let eye = point(&s, diag(3, &[1.0, 1.0, 1.0]));
    assert!(flat_embed(&eye).unwrap().vector.iter().all(|x| x.abs() < 1e-15));
    let s = shared(SpaceDescriptor::spd_log_cholesky(2));
    let p = point(&s, diag(2, &[4.0, 9.0]));
    let f = flat_embed(&p).unwrap().vector;
    assert!(max_abs_diff(&f, &[2.0_f64.ln(), 0.0, 0.0, 3.0_f64.ln()]) < 1e-15);
}

#[test]
fn chart_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for s in all_spaces().into_iter().filter(|s| s.is_flat()) {
        for _ in 0..100 {
            let p = random_point(&s, &mut rng);
            let back = flat_restore(&flat_embed(&p).unwrap(), &s, false).unwrap();
            let scale = p.data().iter().fold(1.0_f64, |a, x| a.max(x.abs()));
            assert!(max_abs_diff(back.point.data(), p.data()) <= TOL_ROUNDTRIP * scale);
        }
    }
}

#[test]
fn sphere_maps() {
    let s = shared(SpaceDescriptor::sphere(3));
    let e1 = point(&s, vec![1.0, 0.0, 0.0]);
    let v = sphere_log(&e1, &e1).unwrap();
    assert_eq!(v.vector, vec![0.0; 3]);
    let q = TangentVector::new(&e1, vec![0.0, FRAC_PI_2, 0.0]).unwrap();
    let e2 = sphere_exp(&e1, &q).unwrap();
    assert!(max_abs_diff(e2.data(), &[0.0, 1.0, 0.0]) < 1e-15);
    assert!(TangentVector::new(&e1, vec![0.1, 0.0, 0.0]).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let a = random_point(&s, &mut rng);
        let b = random_point(&s, &mut rng);
        let back = sphere_exp(&a, &sphere_log(&a, &b).unwrap()).unwrap();
        assert!(max_abs_diff(back.data(), b.data()) < 1e-10);
    }
}

#[test]
fn parallel_transport_is_an_isometry_onto_the_target_tangent_space() {
    let s = shared(SpaceDescriptor::sphere(4));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let a = random_point(&s, &mut rng);
        let b = random_point(&s, &mut rng);
        let c = random_point(&s, &mut rng);
        let v = sphere_log(&a, &c).unwrap();
        let u = sphere_log(&a, &b).unwrap();
        let pv = sphere_parallel_transport(&a, &b, &v).unwrap();
        let pu = sphere_parallel_transport(&a, &b, &u).unwrap();
        assert!(sphere::dot(&pv.vector, b.data()).abs() < 1e-12);
        assert!((pv.norm() - v.norm()).abs() < 1e-12);
        assert!((sphere::dot(&pv.vector, &pu.vector) - sphere::dot(&v.vector, &u.vector)).abs() < 1e-12);
        // The geodesic direction maps to minus the reverse logarithm.
        let back = sphere_log(&b, &a).unwrap();
        assert!(max_abs_diff(&pu.vector, &back.scaled(-1.0).vector) < 1e-12);
    }
}

#[test]
fn fisher_rao_examples() {
    let n = 3001;
    let domain: Vec<f64> = (0..n).map(|i| -1.0 + 3.5 * i as f64 / (n - 1) as f64).collect();
    let box_density = |lo: f64, hi: f64| -> Vec<f64> {
        // Trapezoid-normalized indicator.
        let raw: Vec<f64> = domain.iter().map(|&x| if x >= lo && x <= hi { 1.0 } else { 0.0 }).collect();
        let mass: f64 = domain.windows(2).enumerate().map(|(i, w)| 0.5 * (w[1] - w[0]) * (raw[i] + raw[i + 1])).sum();
        raw.iter().map(|x| x / mass).collect()
    };
    let f = box_density(0.0, 1.0);
    let g = box_density(0.5, 1.5);
    let far = box_density(1.6, 2.4);
    assert!(fisher_rao_distance(&f, &f, &domain).unwrap() < 1e-7);
    assert!((fisher_rao_distance(&f, &far, &domain).unwrap() - FRAC_PI_2).abs() < 1e-12);
    // Indicators are resolved only to the grid spacing.
    assert!((fisher_rao_distance(&f, &g, &domain).unwrap() - PI / 3.0).abs() < 1e-3);
    let bad: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
    assert!(fisher_rao_distance(&bad, &f, &domain).is_err());
}

#[test]
fn product_distance_examples() {
    let s = shared(SpaceDescriptor::scalar());
    let p = |x: f64| point(&s, vec![x]);
    assert_eq!(product_distance(&[p(0.0), p(0.0)], &[p(3.0), p(4.0)]).unwrap(), 5.0);
    assert_eq!(product_distance(&[p(1.0)], &[p(3.0)]).unwrap(), 2.0);
    assert_eq!(product_distance(&[p(1.0), p(2.0)], &[p(1.0), p(2.0)]).unwrap(), 0.0);
    assert!(product_distance(&[p(1.0)], &[]).is_err());
}

#[test]
fn composition_mapping() {
    let s = shared(SpaceDescriptor::sphere(3));
    let p = composition_to_sphere(&s, &[0.25, 0.25, 0.5], None).unwrap();
    assert!(max_abs_diff(p.data(), &[0.5, 0.5, 0.5_f64.sqrt()]) < 1e-15);
    let z = composition_to_sphere(&s, &[0.0, 0.4, 0.6], Some(1e-6)).unwrap();
    assert!(z.data()[0] > 0.0);
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn geodesic_axiom(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
        for s in all_spaces() {
            let a = random_point(&s, &mut rng);
            let b = random_point(&s, &mut rng);
            let d = distance(&a, &b).unwrap();
            let path: Vec<ObjectPoint> = ts.iter().map(|&t| geodesic_eval(&a, &b, t).unwrap()).collect();
            for (i, si) in ts.iter().enumerate() {
                for (k, tk) in ts.iter().enumerate() {
                    let got = distance(&path[i], &path[k]).unwrap();
                    prop_assert!((got - (tk - si).abs() * d).abs() <= 1e-9 * (1.0 + d), "{}", s.kind());
                }
            }
        }
    }

    #[test]
    fn transport_sends_alpha_to_beta(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in all_spaces() {
            let a = random_point(&s, &mut rng);
            let b = random_point(&s, &mut rng);
            let r = transport(&a, &b, &a, true).unwrap();
            let d = distance(&a, &b).unwrap();
            prop_assert!(distance(&r.point, &b).unwrap() <= 1e-9 * (1.0 + d), "{}", s.kind());
        }
    }

    #[test]
    fn flat_mean_is_the_minimizer(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in all_spaces().into_iter().filter(|s| s.is_flat()) {
            let pts: Vec<ObjectPoint> = (0..4).map(|_| random_point(&s, &mut rng)).collect();
            let refs: Vec<&ObjectPoint> = pts.iter().collect();
            let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 0.05).collect();
            let total: f64 = raw.iter().sum();
            let w = SimplexWeights::new(raw.iter().map(|x| x / total).collect()).unwrap();
            let m = weighted_frechet_mean(&refs, &w).unwrap();
            let f = |nu: &ObjectPoint| -> f64 {
                refs.iter().zip(w.values()).map(|(p, wj)| wj * distance(nu, p).unwrap().powi(2)).sum()
            };
            let f0 = f(&m);
            for _ in 0..100 {
                let other = random_point(&s, &mut rng);
                let nearby = geodesic_eval(&m, &other, 1e-3).unwrap();
                prop_assert!(f0 <= f(&nearby) + 1e-12 * (1.0 + f0), "{}", s.kind());
            }
        }
    }

    #[test]
    fn quantile_outputs_stay_monotone(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = shared(SpaceDescriptor::wasserstein1d(31));
        let a = random_point(&s, &mut rng);
        let b = random_point(&s, &mut rng);
        let o = random_point(&s, &mut rng);
        let t: f64 = rng.random();
        prop_assert!(validate_point(&geodesic_eval(&a, &b, t).unwrap()).is_ok());
        let w = SimplexWeights::new(vec![t, 1.0 - t]).unwrap();
        prop_assert!(validate_point(&weighted_frechet_mean(&[&a, &b], &w).unwrap()).is_ok());
        prop_assert!(validate_point(&transport(&a, &b, &o, true).unwrap().point).is_ok());
    }

    #[test]
    fn sphere_mean_is_stationary(seed in seeds()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = shared(SpaceDescriptor::sphere(5));
        let pts: Vec<ObjectPoint> = (0..6).map(|_| random_point(&s, &mut rng)).collect();
        let refs: Vec<&ObjectPoint> = pts.iter().collect();
        let raw: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let w = SimplexWeights::new(raw.iter().map(|x| x / total).collect()).unwrap();
        let m = weighted_frechet_mean(&refs, &w).unwrap();
        prop_assert!(validate_point(&m).is_ok());
        let mut grad = vec![0.0; 5];
        for (p, wj) in refs.iter().zip(w.values()) {
            for (g, x) in grad.iter_mut().zip(&sphere_log(&m, p).unwrap().vector) {
                *g += wj * x;
            }
        }
        prop_assert!(sphere::norm(&grad) <= TOL_MEAN);
    }
}
