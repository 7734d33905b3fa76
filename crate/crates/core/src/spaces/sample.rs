//! Random valid points, used by the simulators and property tests.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ObjectPoint, SpaceDescriptor, SpaceKind};
use crate::linalg::{symmetrize, to_row_major};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws a valid point of `space`. Sphere draws lie strictly inside the
/// positive orthant; SPD draws have eigenvalues bounded below by 0.5.
pub fn random_point<R: Rng + ?Sized>(space: &Arc<SpaceDescriptor>, rng: &mut R) -> ObjectPoint {
    let m = space.dim();
    let data = match space.kind() {
        SpaceKind::Laplacian => {
            let mut a = vec![0.0; m * m];
            for i in 0..m {
                for j in (i + 1)..m {
                    if rng.random_bool(0.6) {
                        let w: f64 = rng.random_range(0.1..1.0);
                        a[i * m + j] = -w;
                        a[j * m + i] = -w;
                        a[i * m + i] += w;
                        a[j * m + j] += w;
                    }
                }
            }
            a
        }
        SpaceKind::Sphere => {
            let mut v: Vec<f64> = (0..m).map(|_| normal(rng).abs() + 0.05).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        }
        SpaceKind::SpdFrobenius
        | SpaceKind::SpdLogEuclidean
        | SpaceKind::SpdPower
        | SpaceKind::SpdLogCholesky => {
            let b = DMatrix::from_fn(m, m, |_, _| normal(rng));
            let a = symmetrize(&(&b * b.transpose() / m as f64 + DMatrix::identity(m, m) * 0.5));
            to_row_major(&a)
        }
        SpaceKind::Wasserstein1d => {
            let loc = 2.0 * normal(rng);
            let scale = 0.5 + rng.random::<f64>();
            let g = space.dim() as f64;
            let mut acc = loc - scale;
            (0..m)
                .map(|_| {
                    acc += scale * 2.0 * rng.random::<f64>() / g;
                    acc
                })
                .collect()
        }
        SpaceKind::L2Function => (0..m).map(|_| normal(rng)).collect(),
    };
    ObjectPoint::from_parts(Arc::clone(space), data)
}
