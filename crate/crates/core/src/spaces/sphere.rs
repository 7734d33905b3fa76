//! Exponential and logarithmic maps on the unit sphere, the weighted
//! intrinsic mean and tangent-rotation transport.

use std::sync::Arc;

use super::charts::{RepairKind, RepairNote, Repaired};
use super::{ObjectPoint, SpaceKind, MAX_ITER_MEAN, REPAIR_BUDGET, TOL_DEGENERATE, TOL_MEAN, TOL_VALIDATE};
use crate::error::{GscError, Result};

/// Tangent vector at a point of the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ObjectPoint,
    pub vector: Vec<f64>,
}

impl TangentVector {
    /// Checks that `vector` lies in the tangent space at `base`.
    pub fn new(base: &ObjectPoint, vector: Vec<f64>) -> Result<Self> {
        require_sphere(base)?;
        if vector.len() != base.data().len() {
            return Err(GscError::Dimension(format!(
                "tangent vector of length {} at a point of length {}",
                vector.len(),
                base.data().len()
            )));
        }
        let scale = 1.0_f64.max(norm(&vector));
        let inner = dot(&vector, base.data());
        if inner.abs() > TOL_VALIDATE * scale {
            return Err(GscError::InvalidArgument(format!(
                "vector is not tangent at its base (inner product {inner:e})"
            )));
        }
        Ok(Self {
            base: base.clone(),
            vector,
        })
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vector)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            base: self.base.clone(),
            vector: self.vector.iter().map(|x| t * x).collect(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn require_sphere(p: &ObjectPoint) -> Result<()> {
    if p.space().kind() == SpaceKind::Sphere {
        Ok(())
    } else {
        Err(GscError::SpaceMismatch(format!(
            "sphere operation on a {} point",
            p.space().kind()
        )))
    }
}

/// Great-circle distance, `2·atan2(‖a−b‖, ‖a+b‖)`, which stays accurate for
/// nearly equal and nearly antipodal pairs.
pub(crate) fn arc_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

fn log_raw(base: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let plus = base
        .iter()
        .zip(target)
        .map(|(x, y)| (x + y) * (x + y))
        .sum::<f64>()
        .sqrt();
    if plus < TOL_DEGENERATE.sqrt() {
        return Err(GscError::Antipodal);
    }
    let theta = arc_distance(base, target);
    let c = dot(base, target);
    let u: Vec<f64> = target.iter().zip(base).map(|(y, x)| y - c * x).collect();
    let un = norm(&u);
    if theta == 0.0 || un == 0.0 {
        return Ok(vec![0.0; base.len()]);
    }
    Ok(u.into_iter().map(|x| theta * x / un).collect())
}

fn exp_raw(base: &[f64], v: &[f64]) -> Vec<f64> {
    let theta = norm(v);
    if theta == 0.0 {
        return base.to_vec();
    }
    let (s, c) = theta.sin_cos();
    let mut out: Vec<f64> = base
        .iter()
        .zip(v)
        .map(|(x, w)| c * x + s * w / theta)
        .collect();
    let n = norm(&out);
    out.iter_mut().for_each(|x| *x /= n);
    out
}

pub fn sphere_log(base: &ObjectPoint, target: &ObjectPoint) -> Result<TangentVector> {
    require_sphere(base)?;
    super::check_same(base, target)?;
    Ok(TangentVector {
        base: base.clone(),
        vector: log_raw(base.data(), target.data())?,
    })
}

/// Exponential map. The result must stay in the positive orthant.
pub fn sphere_exp(base: &ObjectPoint, v: &TangentVector) -> Result<ObjectPoint> {
    require_sphere(base)?;
    super::check_same(base, &v.base)?;
    let out = exp_raw(base.data(), &v.vector);
    if let Some(i) = out.iter().position(|&x| x < -TOL_VALIDATE) {
        return Err(GscError::InvalidPoint(format!(
            "exponential map left the positive orthant (coordinate {i} = {:e})",
            out[i]
        )));
    }
    Ok(ObjectPoint::from_parts(Arc::clone(base.space()), out))
}

/// Parallel transport of `v` (tangent at `a`) along the geodesic to `b`.
pub fn sphere_parallel_transport(
    a: &ObjectPoint,
    b: &ObjectPoint,
    v: &TangentVector,
) -> Result<TangentVector> {
    require_sphere(a)?;
    super::check_same(a, b)?;
    super::check_same(a, &v.base)?;
    let u = log_raw(a.data(), b.data())?;
    let theta2 = dot(&u, &u);
    if theta2 == 0.0 {
        return Ok(TangentVector {
            base: b.clone(),
            vector: v.vector.clone(),
        });
    }
    let u_back = log_raw(b.data(), a.data())?;
    let k = dot(&u, &v.vector) / theta2;
    let vector = v
        .vector
        .iter()
        .zip(u.iter().zip(&u_back))
        .map(|(x, (p, q))| x - k * (p + q))
        .collect();
    Ok(TangentVector {
        base: b.clone(),
        vector,
    })
}

fn mean_objective(nu: &[f64], points: &[&ObjectPoint], weights: &[f64]) -> f64 {
    points
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w != 0.0)
        .map(|(p, &w)| {
            let d = arc_distance(nu, p.data());
            w * d * d
        })
        .sum()
}

fn mean_gradient(nu: &[f64], points: &[&ObjectPoint], weights: &[f64]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; nu.len()];
    for (p, &w) in points.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let l = log_raw(nu, p.data())?;
        for (a, x) in g.iter_mut().zip(&l) {
            *a += w * x;
        }
    }
    Ok(g)
}

/// Weighted intrinsic (Karcher) mean by Riemannian gradient descent with
/// step halving. Starts from the normalized extrinsic average unless
/// `init` is given.
pub(crate) fn intrinsic_mean(
    points: &[&ObjectPoint],
    weights: &[f64],
    init: Option<&ObjectPoint>,
) -> Result<ObjectPoint> {
    let first = points[0];
    let d = first.data().len();
    let mut nu = match init {
        Some(p) => p.data().to_vec(),
        None => {
            let mut acc = vec![0.0; d];
            for (p, &w) in points.iter().zip(weights) {
                for (a, x) in acc.iter_mut().zip(p.data()) {
                    *a += w * x;
                }
            }
            let n = norm(&acc);
            if n < TOL_DEGENERATE {
                return Err(GscError::Degenerate(
                    "extrinsic average vanishes; no mean initialization".into(),
                ));
            }
            acc.iter_mut().for_each(|x| *x /= n);
            acc
        }
    };
    let mut f = mean_objective(&nu, points, weights);
    let mut grad_norm = f64::INFINITY;
    for _ in 0..MAX_ITER_MEAN {
        let g = mean_gradient(&nu, points, weights)?;
        grad_norm = norm(&g);
        if grad_norm < TOL_MEAN {
            return Ok(ObjectPoint::from_parts(Arc::clone(first.space()), nu));
        }
        let mut eta = 1.0;
        let mut moved = false;
        while eta > 1e-12 {
            let step: Vec<f64> = g.iter().map(|x| eta * x).collect();
            let cand = exp_raw(&nu, &step);
            let fc = mean_objective(&cand, points, weights);
            if fc <= f + 4.0 * f64::EPSILON * f.abs() {
                nu = cand;
                f = fc;
                moved = true;
                break;
            }
            eta *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Err(GscError::NotConverged {
        what: "sphere Fréchet mean",
        iterations: MAX_ITER_MEAN,
        residual: grad_norm,
    })
}

/// `Γ_{α,β}(ω) = Exp_ω(θ v/‖v‖)` where `θ = d(α,β)` and `v` is the tangent
/// projection at `ω` of the direction from `α` toward `β`.
pub(crate) fn transport(
    alpha: &ObjectPoint,
    beta: &ObjectPoint,
    omega: &ObjectPoint,
    repair: bool,
) -> Result<Repaired> {
    let (a, b, o) = (alpha.data(), beta.data(), omega.data());
    let theta = arc_distance(a, b);
    let c = dot(a, b);
    let v_ab: Vec<f64> = b.iter().zip(a).map(|(y, x)| y - c * x).collect();
    let n_ab = norm(&v_ab);
    if theta == 0.0 || n_ab == 0.0 {
        return Ok(Repaired {
            point: omega.clone(),
            repair: None,
        });
    }
    let e: Vec<f64> = v_ab.iter().map(|x| x / n_ab).collect();
    let k = dot(o, &e);
    let v: Vec<f64> = e.iter().zip(o).map(|(x, w)| x - k * w).collect();
    let nv = norm(&v);
    if nv < TOL_DEGENERATE {
        return Err(GscError::Degenerate(
            "transport direction vanishes at the target base point".into(),
        ));
    }
    let step: Vec<f64> = v.iter().map(|x| theta * x / nv).collect();
    let out = exp_raw(o, &step);
    let negative = out
        .iter()
        .filter(|&&x| x < 0.0)
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let space = Arc::clone(omega.space());
    if out.iter().all(|&x| x >= -TOL_VALIDATE) {
        return Ok(Repaired {
            point: ObjectPoint::from_parts(space, out),
            repair: None,
        });
    }
    if !repair {
        return Err(GscError::InvalidPoint(format!(
            "transported point left the positive orthant (negative part {negative:e}) and repair is disabled"
        )));
    }
    if negative > REPAIR_BUDGET {
        return Err(GscError::RepairBudget(format!(
            "orthant clip of {negative:e} exceeds {REPAIR_BUDGET:e}"
        )));
    }
    log::warn!("orthant repair clipped a transported sphere point (change {negative:e})");
    let mut clipped: Vec<f64> = out.iter().map(|x| x.max(0.0)).collect();
    let n = norm(&clipped);
    clipped.iter_mut().for_each(|x| *x /= n);
    Ok(Repaired {
        point: ObjectPoint::from_parts(space, clipped),
        repair: Some(RepairNote {
            kind: RepairKind::OrthantClip,
            magnitude: negative,
        }),
    })
}
