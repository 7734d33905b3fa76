//! Geodesic metric spaces for panel outcomes.
//!
//! Every space except the sphere has a *flat chart*: a bijection onto a
//! subset of a Euclidean space in which geodesics are straight segments,
//! weighted Fréchet means are weighted averages and geodesic transport is a
//! translation. The sphere is handled intrinsically through its exponential
//! and logarithmic maps.
//!
//! | kind                | chart                                      |
//! |---------------------|--------------------------------------------|
//! | `laplacian`         | identity on the m×m matrix                 |
//! | `spd_frobenius`     | identity                                   |
//! | `spd_log_euclidean` | matrix logarithm                           |
//! | `spd_power`         | matrix power `A^p`                         |
//! | `spd_log_cholesky`  | strict lower Cholesky part + log diagonal  |
//! | `wasserstein1d`     | quantile function on a probability grid    |
//! | `l2function`        | function values on a domain grid           |
//!
//! Distances on the two grid-valued kinds are weighted by trapezoidal
//! quadrature, so the chart is isometric only after scaling each coordinate
//! by the square root of its quadrature weight ([`SpaceDescriptor::isometric_scale`]).

mod charts;
mod quantile;
pub mod sample;
mod sphere;

use std::fmt;
use std::sync::Arc;

use crate::error::{GscError, Result};
use crate::simplex::SimplexWeights;

pub use charts::{flat_embed, flat_restore, FlatCoordinates, RepairKind, RepairNote, Repaired};
pub use quantile::{isotonic_projection, quantile_eval, quantile_invert};
pub use sphere::{sphere_exp, sphere_log, sphere_parallel_transport, TangentVector};

pub const TOL_VALIDATE: f64 = 1e-8;
pub const TOL_ROUNDTRIP: f64 = 1e-9;
pub const TOL_MEAN: f64 = 1e-10;
pub const MAX_ITER_MEAN: usize = 1000;
pub const EPS_PD: f64 = 1e-10;
pub const REPAIR_BUDGET: f64 = 1e-6;
pub const TOL_DEGENERATE: f64 = 1e-12;
pub const DEFAULT_QUANTILE_GRID: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    Laplacian,
    Sphere,
    SpdFrobenius,
    SpdLogEuclidean,
    SpdPower,
    SpdLogCholesky,
    Wasserstein1d,
    L2Function,
}

impl SpaceKind {
    pub const ALL: [SpaceKind; 8] = [
        SpaceKind::Laplacian,
        SpaceKind::Sphere,
        SpaceKind::SpdFrobenius,
        SpaceKind::SpdLogEuclidean,
        SpaceKind::SpdPower,
        SpaceKind::SpdLogCholesky,
        SpaceKind::Wasserstein1d,
        SpaceKind::L2Function,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Laplacian => "laplacian",
            SpaceKind::Sphere => "sphere",
            SpaceKind::SpdFrobenius => "spd_frobenius",
            SpaceKind::SpdLogEuclidean => "spd_log_euclidean",
            SpaceKind::SpdPower => "spd_power",
            SpaceKind::SpdLogCholesky => "spd_log_cholesky",
            SpaceKind::Wasserstein1d => "wasserstein1d",
            SpaceKind::L2Function => "l2function",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_matrix(self) -> bool {
        matches!(
            self,
            SpaceKind::Laplacian
                | SpaceKind::SpdFrobenius
                | SpaceKind::SpdLogEuclidean
                | SpaceKind::SpdPower
                | SpaceKind::SpdLogCholesky
        )
    }

    pub fn is_spd(self) -> bool {
        matches!(
            self,
            SpaceKind::SpdFrobenius
                | SpaceKind::SpdLogEuclidean
                | SpaceKind::SpdPower
                | SpaceKind::SpdLogCholesky
        )
    }

    pub fn is_grid(self) -> bool {
        matches!(self, SpaceKind::Wasserstein1d | SpaceKind::L2Function)
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Space kind plus the parameters that select its geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceDescriptor {
    kind: SpaceKind,
    dim: usize,
    power_p: Option<f64>,
    grid: Option<Vec<f64>>,
    quadrature: Vec<f64>,
}

impl SpaceDescriptor {
    /// Builds and validates a descriptor. For matrix kinds `dim` is the node
    /// count `m`; for the sphere it is the ambient dimension `d`; for grid
    /// kinds it must equal the grid length.
    pub fn new(
        kind: SpaceKind,
        dim: usize,
        power_p: Option<f64>,
        grid: Option<Vec<f64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(GscError::InvalidSpace("dim must be positive".into()));
        }
        match (kind, power_p) {
            (SpaceKind::SpdPower, Some(p)) if p.is_finite() && p > 0.0 => {}
            (SpaceKind::SpdPower, _) => {
                return Err(GscError::InvalidSpace(
                    "spd_power requires power_p > 0".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(GscError::InvalidSpace(format!(
                    "power_p is only meaningful for spd_power, not {kind}"
                )))
            }
            _ => {}
        }
        if kind == SpaceKind::Sphere && dim < 2 {
            return Err(GscError::InvalidSpace("sphere needs d >= 2".into()));
        }
        let quadrature = if kind.is_grid() {
            let g = grid.as_ref().ok_or_else(|| {
                GscError::InvalidSpace(format!("{kind} requires a grid"))
            })?;
            if g.len() != dim {
                return Err(GscError::InvalidSpace(format!(
                    "grid length {} does not match dim {dim}",
                    g.len()
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(GscError::InvalidSpace("grid entries must be finite".into()));
            }
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(GscError::InvalidSpace(
                    "grid must be strictly increasing".into(),
                ));
            }
            if kind == SpaceKind::Wasserstein1d && g.iter().any(|&p| p <= 0.0 || p >= 1.0) {
                return Err(GscError::InvalidSpace(
                    "wasserstein1d grid must lie in (0,1)".into(),
                ));
            }
            quadrature_weights(kind, g)
        } else {
            if grid.is_some() {
                return Err(GscError::InvalidSpace(format!("{kind} does not take a grid")));
            }
            Vec::new()
        };
        Ok(Self {
            kind,
            dim,
            power_p,
            grid,
            quadrature,
        })
    }

    pub fn laplacian(m: usize) -> Self {
        Self::new(SpaceKind::Laplacian, m, None, None).expect("valid laplacian space")
    }

    pub fn sphere(d: usize) -> Self {
        Self::new(SpaceKind::Sphere, d, None, None).expect("valid sphere space")
    }

    pub fn spd_frobenius(m: usize) -> Self {
        Self::new(SpaceKind::SpdFrobenius, m, None, None).expect("valid spd space")
    }

    pub fn spd_log_euclidean(m: usize) -> Self {
        Self::new(SpaceKind::SpdLogEuclidean, m, None, None).expect("valid spd space")
    }

    pub fn spd_power(m: usize, p: f64) -> Result<Self> {
        Self::new(SpaceKind::SpdPower, m, Some(p), None)
    }

    pub fn spd_log_cholesky(m: usize) -> Self {
        Self::new(SpaceKind::SpdLogCholesky, m, None, None).expect("valid spd space")
    }

    /// Quantile representation on the equispaced grid `p_i = (i - 0.5)/G`.
    pub fn wasserstein1d(g: usize) -> Self {
        let grid = (1..=g).map(|i| (i as f64 - 0.5) / g as f64).collect();
        Self::new(SpaceKind::Wasserstein1d, g, None, Some(grid)).expect("valid quantile grid")
    }

    pub fn wasserstein1d_with_grid(grid: Vec<f64>) -> Result<Self> {
        Self::new(SpaceKind::Wasserstein1d, grid.len(), None, Some(grid))
    }

    pub fn l2function(grid: Vec<f64>) -> Result<Self> {
        Self::new(SpaceKind::L2Function, grid.len(), None, Some(grid))
    }

    /// Real-valued outcomes: an `l2function` sampled at a single point,
    /// whose quadrature weight is one.
    pub fn scalar() -> Self {
        Self::l2function(vec![0.0]).expect("valid scalar space")
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn power_p(&self) -> Option<f64> {
        self.power_p
    }

    pub fn grid(&self) -> Option<&[f64]> {
        self.grid.as_deref()
    }

    pub fn is_flat(&self) -> bool {
        self.kind != SpaceKind::Sphere
    }

    /// Number of reals stored per point.
    pub fn data_len(&self) -> usize {
        if self.kind.is_matrix() {
            self.dim * self.dim
        } else {
            self.dim
        }
    }

    /// Quadrature weights of the grid kinds; empty otherwise.
    pub fn quadrature(&self) -> &[f64] {
        &self.quadrature
    }

    /// Per-coordinate factor that makes the flat chart isometric.
    pub fn isometric_scale(&self) -> Vec<f64> {
        if self.kind.is_grid() {
            self.quadrature.iter().map(|w| w.sqrt()).collect()
        } else {
            vec![1.0; self.data_len()]
        }
    }

    pub fn into_shared(self) -> Arc<SpaceDescriptor> {
        Arc::new(self)
    }
}

/// Trapezoidal weights on the grid. For quantile grids the two boundary
/// cells are closed to 0 and 1 by constant extension so that the weights
/// integrate over the whole unit interval.
fn quadrature_weights(kind: SpaceKind, grid: &[f64]) -> Vec<f64> {
    let g = grid.len();
    if g == 1 {
        return vec![1.0];
    }
    let mut w = vec![0.0; g];
    for i in 0..g - 1 {
        let h = grid[i + 1] - grid[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    if kind == SpaceKind::Wasserstein1d {
        w[0] += grid[0];
        w[g - 1] += 1.0 - grid[g - 1];
    }
    w
}

/// A value in one of the registered spaces.
#[derive(Debug, Clone)]
pub struct ObjectPoint {
    space: Arc<SpaceDescriptor>,
    data: Vec<f64>,
}

impl PartialEq for ObjectPoint {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.data == other.data
    }
}

impl ObjectPoint {
    /// Wraps raw data after a shape and finiteness check. Geometric validity
    /// is checked separately by [`validate_point`].
    pub fn new(space: &Arc<SpaceDescriptor>, data: Vec<f64>) -> Result<Self> {
        if data.len() != space.data_len() {
            return Err(GscError::Dimension(format!(
                "{} point needs {} values, got {}",
                space.kind(),
                space.data_len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(GscError::InvalidPoint(format!("entry {i} is not finite")));
        }
        Ok(Self {
            space: Arc::clone(space),
            data,
        })
    }

    /// Like [`ObjectPoint::new`] followed by [`validate_point`].
    pub fn validated(space: &Arc<SpaceDescriptor>, data: Vec<f64>) -> Result<Self> {
        let p = Self::new(space, data)?;
        validate_point(&p).map_err(|v| GscError::InvalidPoint(v.0))?;
        Ok(p)
    }

    pub(crate) fn from_parts(space: Arc<SpaceDescriptor>, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), space.data_len());
        Self { space, data }
    }

    pub fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Row-major matrix view for matrix kinds.
    pub fn matrix(&self) -> Option<nalgebra::DMatrix<f64>> {
        self.space
            .kind()
            .is_matrix()
            .then(|| crate::linalg::from_row_major(self.space.dim(), &self.data))
    }
}

pub(crate) fn same_space(a: &Arc<SpaceDescriptor>, b: &Arc<SpaceDescriptor>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_same(a: &ObjectPoint, b: &ObjectPoint) -> Result<()> {
    if same_space(&a.space, &b.space) {
        Ok(())
    } else {
        Err(GscError::SpaceMismatch(format!(
            "{} (dim {}) vs {} (dim {})",
            a.space.kind(),
            a.space.dim(),
            b.space.kind(),
            b.space.dim()
        )))
    }
}

/// First violated point invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn validate_point(p: &ObjectPoint) -> std::result::Result<(), Violation> {
    let space = p.space();
    let data = p.data();
    if data.len() != space.data_len() {
        return Err(Violation(format!(
            "expected {} values, found {}",
            space.data_len(),
            data.len()
        )));
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Violation(format!("entry {i} is not finite")));
    }
    let scale = data.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let tol = TOL_VALIDATE * scale;
    match space.kind() {
        SpaceKind::Laplacian => {
            let m = space.dim();
            for i in 0..m {
                let mut row = 0.0;
                for j in 0..m {
                    let a = data[i * m + j];
                    row += a;
                    if j > i && (a - data[j * m + i]).abs() > tol {
                        return Err(Violation(format!("not symmetric at ({i},{j})")));
                    }
                    if i != j && a > tol {
                        return Err(Violation(format!(
                            "positive off-diagonal entry {a:e} at ({i},{j})"
                        )));
                    }
                }
                if row.abs() > tol {
                    return Err(Violation(format!("row {i} sums to {row:e}, not 0")));
                }
            }
        }
        SpaceKind::Sphere => {
            if let Some(i) = data.iter().position(|&x| x < -TOL_VALIDATE) {
                return Err(Violation(format!("negative coordinate at {i}")));
            }
            let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > TOL_VALIDATE {
                return Err(Violation(format!("norm {norm} is not 1")));
            }
        }
        SpaceKind::SpdFrobenius
        | SpaceKind::SpdLogEuclidean
        | SpaceKind::SpdPower
        | SpaceKind::SpdLogCholesky => {
            let a = p.matrix().expect("matrix kind");
            if crate::linalg::max_asymmetry(&a) > tol {
                return Err(Violation("matrix is not symmetric".into()));
            }
            let min_eig = crate::linalg::sym_eigenvalues(&a)[0];
            if min_eig < EPS_PD {
                return Err(Violation(format!(
                    "minimum eigenvalue {min_eig:e} below {EPS_PD:e}"
                )));
            }
        }
        SpaceKind::Wasserstein1d => {
            if let Some(i) = data.windows(2).position(|w| w[1] < w[0] - tol) {
                return Err(Violation(format!(
                    "quantile function decreases between grid points {i} and {}",
                    i + 1
                )));
            }
        }
        SpaceKind::L2Function => {}
    }
    Ok(())
}

fn weighted_norm(space: &SpaceDescriptor, diff: impl Iterator<Item = f64>) -> f64 {
    if space.kind().is_grid() {
        diff.zip(space.quadrature())
            .map(|(d, w)| w * d * d)
            .sum::<f64>()
            .sqrt()
    } else {
        diff.map(|d| d * d).sum::<f64>().sqrt()
    }
}

pub fn distance(a: &ObjectPoint, b: &ObjectPoint) -> Result<f64> {
    check_same(a, b)?;
    if a.space().kind() == SpaceKind::Sphere {
        return Ok(sphere::arc_distance(a.data(), b.data()));
    }
    let fa = flat_embed(a)?;
    let fb = flat_embed(b)?;
    Ok(weighted_norm(
        a.space(),
        fa.vector.iter().zip(&fb.vector).map(|(x, y)| x - y),
    ))
}

/// Point at fraction `t` along the unique geodesic from `a` to `b`.
pub fn geodesic_eval(a: &ObjectPoint, b: &ObjectPoint, t: f64) -> Result<ObjectPoint> {
    check_same(a, b)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(GscError::InvalidArgument(format!(
            "geodesic parameter {t} outside [0,1]"
        )));
    }
    if a.space().kind() == SpaceKind::Sphere {
        // Antipodal pairs are rejected even at the endpoints.
        let v = sphere_log(a, b)?;
        if t == 0.0 {
            return Ok(a.clone());
        }
        if t == 1.0 {
            return Ok(b.clone());
        }
        return sphere_exp(a, &v.scaled(t));
    }
    if t == 0.0 {
        return Ok(a.clone());
    }
    if t == 1.0 {
        return Ok(b.clone());
    }
    let fa = flat_embed(a)?;
    let fb = flat_embed(b)?;
    let v = fa
        .vector
        .iter()
        .zip(&fb.vector)
        .map(|(x, y)| (1.0 - t) * x + t * y)
        .collect();
    Ok(flat_restore(&FlatCoordinates { vector: v }, a.space(), false)?.point)
}

/// Weighted Fréchet mean `argmin_ν Σ_j w_j d²(ν, y_j)`.
pub fn weighted_frechet_mean(points: &[&ObjectPoint], weights: &SimplexWeights) -> Result<ObjectPoint> {
    let first = *points
        .first()
        .ok_or_else(|| GscError::InvalidArgument("Fréchet mean of an empty set".into()))?;
    if weights.len() != points.len() {
        return Err(GscError::Dimension(format!(
            "{} weights for {} points",
            weights.len(),
            points.len()
        )));
    }
    for p in &points[1..] {
        check_same(first, p)?;
    }
    if first.space().kind() == SpaceKind::Sphere {
        return sphere::intrinsic_mean(points, weights.values(), None);
    }
    let n = first.space().data_len();
    let mut acc = vec![0.0; n];
    for (p, &w) in points.iter().zip(weights.values()) {
        if w == 0.0 {
            continue;
        }
        let f = flat_embed(p)?;
        for (a, x) in acc.iter_mut().zip(&f.vector) {
            *a += w * x;
        }
    }
    let restored = flat_restore(&FlatCoordinates { vector: acc }, first.space(), false)?;
    Ok(restored.point)
}

/// Geodesic transport `Γ_{α,β}(ω)`: applies the displacement from `alpha`
/// to `beta` at `omega`.
pub fn transport(
    alpha: &ObjectPoint,
    beta: &ObjectPoint,
    omega: &ObjectPoint,
    repair: bool,
) -> Result<Repaired> {
    check_same(alpha, beta)?;
    check_same(alpha, omega)?;
    match alpha.space().kind() {
        SpaceKind::Sphere => sphere::transport(alpha, beta, omega, repair),
        SpaceKind::Wasserstein1d => {
            let grid = alpha.space().grid().expect("quantile grid");
            let composed: Vec<f64> = omega
                .data()
                .iter()
                .map(|&x| {
                    let u = quantile_invert(grid, alpha.data(), x);
                    quantile_eval(grid, beta.data(), u)
                })
                .collect();
            flat_restore(&FlatCoordinates { vector: composed }, alpha.space(), repair)
        }
        _ => {
            let fa = flat_embed(alpha)?;
            let fb = flat_embed(beta)?;
            let fo = flat_embed(omega)?;
            let v = fo
                .vector
                .iter()
                .zip(fb.vector.iter().zip(&fa.vector))
                .map(|(o, (b, a))| o + (b - a))
                .collect();
            flat_restore(&FlatCoordinates { vector: v }, alpha.space(), repair)
        }
    }
}

/// Flat coordinates scaled so that Euclidean distances between them equal
/// distances in the space.
pub fn isometric_coordinates(p: &ObjectPoint) -> Result<Vec<f64>> {
    let mut v = flat_embed(p)?.vector;
    if p.space().kind().is_grid() {
        for (x, w) in v.iter_mut().zip(p.space().quadrature()) {
            *x *= w.sqrt();
        }
    }
    Ok(v)
}

/// Maps a composition to the positive orthant of the sphere by the
/// square-root transform. With `floor`, proportions below it are raised to
/// it and the vector is renormalized first (handles zero components).
pub fn composition_to_sphere(
    space: &Arc<SpaceDescriptor>,
    proportions: &[f64],
    floor: Option<f64>,
) -> Result<ObjectPoint> {
    if space.kind() != SpaceKind::Sphere {
        return Err(GscError::SpaceMismatch(format!(
            "compositions map to the sphere, not {}",
            space.kind()
        )));
    }
    if proportions.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(GscError::InvalidPoint(
            "proportions must be finite and nonnegative".into(),
        ));
    }
    let mut p: Vec<f64> = match floor {
        Some(f) => proportions.iter().map(|&x| x.max(f)).collect(),
        None => proportions.to_vec(),
    };
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(GscError::InvalidPoint("proportions sum to zero".into()));
    }
    p.iter_mut().for_each(|x| *x = (*x / total).sqrt());
    ObjectPoint::validated(space, p)
}

/// Fisher–Rao distance between two densities sampled on `domain`.
pub fn fisher_rao_distance(f: &[f64], g: &[f64], domain: &[f64]) -> Result<f64> {
    if f.len() != domain.len() || g.len() != domain.len() || domain.len() < 2 {
        return Err(GscError::Dimension(
            "densities and domain grid must share a length of at least 2".into(),
        ));
    }
    if domain.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GscError::InvalidArgument(
            "domain grid must be strictly increasing".into(),
        ));
    }
    let trapezoid = |h: &dyn Fn(usize) -> f64| {
        domain
            .windows(2)
            .enumerate()
            .map(|(i, w)| 0.5 * (w[1] - w[0]) * (h(i) + h(i + 1)))
            .sum::<f64>()
    };
    for (name, dens) in [("f", f), ("g", g)] {
        if dens.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(GscError::InvalidArgument(format!(
                "density {name} has negative or non-finite values"
            )));
        }
        let mass = trapezoid(&|i| dens[i]);
        if (mass - 1.0).abs() > TOL_VALIDATE {
            return Err(GscError::InvalidArgument(format!(
                "density {name} integrates to {mass}, not 1"
            )));
        }
    }
    let affinity = trapezoid(&|i| (f[i] * g[i]).sqrt());
    Ok(affinity.clamp(-1.0, 1.0).acos())
}

/// Distance in a product space with `d² = Σ_k d_k²`.
pub fn product_distance(xs: &[ObjectPoint], ys: &[ObjectPoint]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(GscError::Dimension(format!(
            "product of {} vs {} components",
            xs.len(),
            ys.len()
        )));
    }
    let mut sq = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let d = distance(x, y)?;
        sq += d * d;
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests;
