use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GscError, Result};
use crate::spaces::{flat_embed, flat_restore, FlatCoordinates, ObjectPoint, Repaired, SpaceDescriptor};

/// Global Fréchet regression of flat-chart outcomes on Euclidean
/// covariates, fitted on the control units.
///
/// The prediction at `x` is the flat combination
/// `(1/J) Σ_j s_j(x) Y_{j,t}` with `s_j(x) = 1 + (X_j − X̄)' Σ̂⁻¹ (x − X̄)`.
#[derive(Debug, Clone)]
pub struct FrechetRegressionModel {
    space: Arc<SpaceDescriptor>,
    covariates: Vec<DVector<f64>>,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    pseudo_inverse: bool,
    /// `[t][j]` flat coordinates.
    outcomes: Vec<Vec<Vec<f64>>>,
}

/// Relative eigenvalue threshold below which `Σ̂` counts as singular.
const SINGULAR_TOL: f64 = 1e-12;

/// `outcomes[j][t]` and `covariates[j]` for the `J` controls.
pub fn fit_global_frechet_regression(
    space: &Arc<SpaceDescriptor>,
    outcomes: &[Vec<ObjectPoint>],
    covariates: &[Vec<f64>],
    allow_pseudo_inverse: bool,
) -> Result<FrechetRegressionModel> {
    if !space.is_flat() {
        return Err(GscError::InvalidArgument(format!(
            "Fréchet regression needs a flat chart, {} has none",
            space.kind()
        )));
    }
    let j = outcomes.len();
    if j == 0 || covariates.len() != j {
        return Err(GscError::Dimension(format!(
            "{j} outcome rows and {} covariate vectors",
            covariates.len()
        )));
    }
    let p = covariates[0].len();
    if covariates.iter().any(|x| x.len() != p) {
        return Err(GscError::Dimension("covariate vectors differ in length".into()));
    }
    if covariates.iter().flatten().any(|x| !x.is_finite()) {
        return Err(GscError::InvalidArgument("non-finite covariate".into()));
    }
    let xs: Vec<DVector<f64>> = covariates
        .iter()
        .map(|x| DVector::from_column_slice(x))
        .collect();
    let mean = xs.iter().fold(DVector::zeros(p), |acc, x| acc + x) / j as f64;
    let mut covariance = DMatrix::zeros(p, p);
    for x in &xs {
        let d = x - &mean;
        covariance += &d * d.transpose();
    }
    covariance /= j as f64;
    let (precision, pseudo_inverse) = invert(&covariance, allow_pseudo_inverse)?;
    let periods = outcomes[0].len();
    let mut flat = vec![Vec::with_capacity(j); periods];
    for row in outcomes {
        if row.len() != periods {
            return Err(GscError::Dimension("ragged outcome rows".into()));
        }
        for (t, y) in row.iter().enumerate() {
            flat[t].push(flat_embed(y)?.vector);
        }
    }
    Ok(FrechetRegressionModel {
        space: Arc::clone(space),
        covariates: xs,
        mean,
        covariance,
        precision,
        pseudo_inverse,
        outcomes: flat,
    })
}

fn invert(s: &DMatrix<f64>, allow_pseudo: bool) -> Result<(DMatrix<f64>, bool)> {
    let p = s.nrows();
    if p == 0 {
        return Ok((DMatrix::zeros(0, 0), false));
    }
    let eig = SymmetricEigen::new(s.clone());
    let top = eig.eigenvalues.amax();
    let cut = SINGULAR_TOL * top.max(f64::MIN_POSITIVE);
    let singular = eig.eigenvalues.iter().any(|&l| l <= cut);
    if singular && !allow_pseudo {
        return Err(GscError::SingularCovariance);
    }
    if singular {
        log::warn!("covariate covariance is singular; using the pseudo-inverse");
    }
    let inv = eig.eigenvalues.map(|l| if l > cut { 1.0 / l } else { 0.0 });
    let u = &eig.eigenvectors;
    Ok((u * DMatrix::from_diagonal(&inv) * u.transpose(), singular))
}

impl FrechetRegressionModel {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn used_pseudo_inverse(&self) -> bool {
        self.pseudo_inverse
    }

    /// Regression weights `s_j(x)` over the training units.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(GscError::Dimension(format!(
                "covariate of length {} for a model with {} covariates",
                x.len(),
                self.mean.len()
            )));
        }
        let dx = self.precision.clone() * (DVector::from_column_slice(x) - &self.mean);
        Ok(self
            .covariates
            .iter()
            .map(|xj| 1.0 + (xj - &self.mean).dot(&dx))
            .collect())
    }

    /// Prediction `m̂_t(x)`. Signed weights may leave the space; `repair`
    /// decides whether small exits are projected back.
    pub fn predict(&self, x: &[f64], t: usize, repair: bool) -> Result<Repaired> {
        let rows = self.outcomes.get(t).ok_or_else(|| {
            GscError::InvalidArgument(format!("period {t} outside the training panel"))
        })?;
        let s = self.weights(x)?;
        let j = rows.len() as f64;
        let mut acc = vec![0.0; rows[0].len()];
        for (sj, y) in s.iter().zip(rows) {
            for (a, v) in acc.iter_mut().zip(y) {
                *a += sj * v / j;
            }
        }
        flat_restore(&FlatCoordinates { vector: acc }, &self.space, repair)
    }
}
