use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix};

use super::{
    isotonic_projection, ObjectPoint, SpaceDescriptor, SpaceKind, EPS_PD, REPAIR_BUDGET,
    TOL_VALIDATE,
};
use crate::error::{GscError, Result};
use crate::linalg::{from_row_major, spectral_norm, sym_apply, symmetrize, to_row_major};

/// Coordinates of a point in the flat chart of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCoordinates {
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairKind {
    /// Eigenvalues clipped back into the positive-definite cone.
    EigenvalueClip,
    /// Positive off-diagonal Laplacian entries clipped to zero.
    LaplacianClip,
    /// Pool-adjacent-violators projection of a quantile vector.
    Isotonic,
    /// Negative sphere coordinates clipped and renormalized.
    OrthantClip,
}

impl RepairKind {
    pub fn name(self) -> &'static str {
        match self {
            RepairKind::EigenvalueClip => "eigenvalue_clip",
            RepairKind::LaplacianClip => "laplacian_clip",
            RepairKind::Isotonic => "isotonic",
            RepairKind::OrthantClip => "orthant_clip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairNote {
    pub kind: RepairKind,
    /// Size of the correction (eigenvalue shift or Frobenius change).
    pub magnitude: f64,
}

/// Output of an operation that may have pushed a point back into its space.
#[derive(Debug, Clone)]
pub struct Repaired {
    pub point: ObjectPoint,
    pub repair: Option<RepairNote>,
}

impl Repaired {
    fn clean(point: ObjectPoint) -> Self {
        Self {
            point,
            repair: None,
        }
    }
}

pub fn flat_embed(p: &ObjectPoint) -> Result<FlatCoordinates> {
    let space = p.space();
    let m = space.dim();
    let vector = match space.kind() {
        SpaceKind::Sphere => {
            return Err(GscError::SpaceMismatch(
                "the sphere has no flat chart".into(),
            ))
        }
        SpaceKind::Laplacian
        | SpaceKind::SpdFrobenius
        | SpaceKind::Wasserstein1d
        | SpaceKind::L2Function => p.data().to_vec(),
        SpaceKind::SpdLogEuclidean => {
            let a = from_row_major(m, p.data());
            let min = crate::linalg::sym_eigenvalues(&a)[0];
            if min <= 0.0 {
                return Err(GscError::InvalidPoint(format!(
                    "matrix logarithm of a non-PD matrix (min eigenvalue {min:e})"
                )));
            }
            to_row_major(&sym_apply(&a, f64::ln))
        }
        SpaceKind::SpdPower => {
            let power = space.power_p().expect("power metric exponent");
            let a = from_row_major(m, p.data());
            to_row_major(&sym_apply(&a, |x| x.max(0.0).powf(power)))
        }
        SpaceKind::SpdLogCholesky => {
            let a = symmetrize(&from_row_major(m, p.data()));
            let l = Cholesky::new(a)
                .ok_or_else(|| {
                    GscError::InvalidPoint("Cholesky factorization failed (not PD)".into())
                })?
                .l();
            let mut out = vec![0.0; m * m];
            for i in 0..m {
                for j in 0..i {
                    out[i * m + j] = l[(i, j)];
                }
                out[i * m + i] = l[(i, i)].ln();
            }
            out
        }
    };
    Ok(FlatCoordinates { vector })
}

/// Maps chart coordinates back to a point. With `repair` set, small exits
/// from the feasible set are projected back and reported; corrections larger
/// than `REPAIR_BUDGET` relative to the spectral norm are errors either way.
pub fn flat_restore(
    c: &FlatCoordinates,
    space: &Arc<SpaceDescriptor>,
    repair: bool,
) -> Result<Repaired> {
    if c.vector.len() != space.data_len() {
        return Err(GscError::Dimension(format!(
            "{} chart needs {} coordinates, got {}",
            space.kind(),
            space.data_len(),
            c.vector.len()
        )));
    }
    if c.vector.iter().any(|x| !x.is_finite()) {
        return Err(GscError::InvalidPoint("non-finite chart coordinates".into()));
    }
    let m = space.dim();
    let wrap = |data: Vec<f64>| ObjectPoint::from_parts(Arc::clone(space), data);
    match space.kind() {
        SpaceKind::Sphere => Err(GscError::SpaceMismatch(
            "the sphere has no flat chart".into(),
        )),
        SpaceKind::L2Function => Ok(Repaired::clean(wrap(c.vector.clone()))),
        SpaceKind::Wasserstein1d => {
            let q = &c.vector;
            let scale = q.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
            let worst = q
                .windows(2)
                .map(|w| w[0] - w[1])
                .fold(0.0_f64, f64::max);
            if worst <= 0.0 {
                return Ok(Repaired::clean(wrap(q.clone())));
            }
            let projected = isotonic_projection(q, space.quadrature());
            if worst <= TOL_VALIDATE * scale {
                return Ok(Repaired::clean(wrap(projected)));
            }
            if !repair {
                return Err(GscError::InvalidPoint(format!(
                    "quantile vector decreases by {worst:e} and repair is disabled"
                )));
            }
            let magnitude = q
                .iter()
                .zip(&projected)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            log::warn!("isotonic repair applied to quantile vector (change {magnitude:e})");
            Ok(Repaired {
                point: wrap(projected),
                repair: Some(RepairNote {
                    kind: RepairKind::Isotonic,
                    magnitude,
                }),
            })
        }
        SpaceKind::Laplacian => restore_laplacian(from_row_major(m, &c.vector), repair)
            .map(|(data, note)| Repaired {
                point: wrap(data),
                repair: note,
            }),
        SpaceKind::SpdFrobenius => {
            let a = symmetrize(&from_row_major(m, &c.vector));
            let (a, note) = clip_spectrum(&a, EPS_PD, repair)?;
            Ok(Repaired {
                point: wrap(to_row_major(&a)),
                repair: note,
            })
        }
        SpaceKind::SpdLogEuclidean => {
            let l = from_row_major(m, &c.vector);
            Ok(Repaired::clean(wrap(to_row_major(&sym_apply(&l, f64::exp)))))
        }
        SpaceKind::SpdPower => {
            let power = space.power_p().expect("power metric exponent");
            let a = symmetrize(&from_row_major(m, &c.vector));
            let (a, note) = clip_spectrum(&a, EPS_PD.powf(power), repair)?;
            let root = sym_apply(&a, |x| x.max(0.0).powf(1.0 / power));
            Ok(Repaired {
                point: wrap(to_row_major(&root)),
                repair: note,
            })
        }
        SpaceKind::SpdLogCholesky => {
            let mut l = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                for j in 0..i {
                    l[(i, j)] = c.vector[i * m + j];
                }
                l[(i, i)] = c.vector[i * m + i].exp();
            }
            let s = symmetrize(&(&l * l.transpose()));
            Ok(Repaired::clean(wrap(to_row_major(&s))))
        }
    }
}

fn clip_spectrum(
    a: &DMatrix<f64>,
    floor: f64,
    repair: bool,
) -> Result<(DMatrix<f64>, Option<RepairNote>)> {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= floor {
        return Ok((a.clone(), None));
    }
    if !repair {
        return Err(GscError::InvalidPoint(format!(
            "matrix left the positive-definite cone (min eigenvalue {min:e}) and repair is disabled"
        )));
    }
    let shift = floor - min;
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if shift > REPAIR_BUDGET * norm {
        return Err(GscError::RepairBudget(format!(
            "eigenvalue clip of {shift:e} exceeds {REPAIR_BUDGET:e} of spectral norm {norm:e}"
        )));
    }
    log::warn!("eigenvalue clipping moved the spectrum by {shift:e}");
    let clipped = eig.eigenvalues.map(|x| x.max(floor));
    let u = &eig.eigenvectors;
    let out = symmetrize(&(u * DMatrix::from_diagonal(&clipped) * u.transpose()));
    Ok((
        out,
        Some(RepairNote {
            kind: RepairKind::EigenvalueClip,
            magnitude: shift,
        }),
    ))
}

fn restore_laplacian(a: DMatrix<f64>, repair: bool) -> Result<(Vec<f64>, Option<RepairNote>)> {
    let m = a.nrows();
    let a = symmetrize(&a);
    let scale = a.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mut worst: f64 = 0.0;
    let mut row_err: f64 = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        for j in 0..m {
            row += a[(i, j)];
            if i != j {
                worst = worst.max(a[(i, j)]);
            }
        }
        row_err = row_err.max(row.abs());
    }
    if worst <= TOL_VALIDATE * scale && row_err <= TOL_VALIDATE * scale {
        return Ok((to_row_major(&a), None));
    }
    if !repair {
        return Err(GscError::InvalidPoint(format!(
            "result is not a graph Laplacian (max off-diagonal {worst:e}, row sum error {row_err:e}) and repair is disabled"
        )));
    }
    let mut fixed = a.clone();
    for i in 0..m {
        let mut off = 0.0;
        for j in 0..m {
            if i != j {
                fixed[(i, j)] = fixed[(i, j)].min(0.0);
                off += fixed[(i, j)];
            }
        }
        fixed[(i, i)] = -off;
    }
    let change = (&fixed - &a).norm();
    let norm = spectral_norm(&a).max(f64::MIN_POSITIVE);
    if change > REPAIR_BUDGET * norm {
        return Err(GscError::RepairBudget(format!(
            "Laplacian clip of {change:e} exceeds {REPAIR_BUDGET:e} of spectral norm {norm:e}"
        )));
    }
    log::warn!("Laplacian repair clipped off-diagonal entries (change {change:e})");
    Ok((
        to_row_major(&fixed),
        Some(RepairNote {
            kind: RepairKind::LaplacianClip,
            magnitude: change,
        }),
    ))
}
