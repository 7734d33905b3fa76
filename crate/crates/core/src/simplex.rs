//! Weight problems over the probability simplex.
//!
//! Flat-chart weight problems are convex quadratics and are solved by
//! accelerated projected gradient followed by a primal active-set polish.
//! Problems without a flat chart (the sphere) go through Nelder–Mead in
//! additive-log-ratio coordinates.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GscError, Result};

/// Accepted deviation of the input sum from one before renormalizing.
const SUM_TOL: f64 = 1e-9;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    values: Vec<f64>,
}

impl SimplexWeights {
    /// Accepts entries ≥ −1e-9 summing to 1 within 1e-9; clips and
    /// renormalizes so the invariants hold exactly.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GscError::InvalidWeights("empty weight vector".into()));
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite() || *x < -SUM_TOL) {
            return Err(GscError::InvalidWeights(format!(
                "entry {i} = {} is negative or not finite",
                values[i]
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(GscError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self::normalized(values))
    }

    /// Projects nonnegative input onto the simplex by scaling.
    pub(crate) fn normalized(mut values: Vec<f64>) -> Self {
        values.iter_mut().for_each(|x| *x = x.max(0.0));
        let sum: f64 = values.iter().sum();
        values.iter_mut().for_each(|x| *x /= sum);
        Self { values }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform weights over an empty set");
        Self {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        assert!(i < n, "vertex index out of range");
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol_kkt: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Project results that leave the feasible set back into it (see
    /// [`crate::spaces::flat_restore`]).
    pub repair: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_kkt: 1e-10,
            max_iter: 10_000,
            restarts: 8,
            seed: 0,
            repair: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_kkt > 0.0) || !self.tol_kkt.is_finite() {
            return Err(GscError::InvalidArgument("tol_kkt must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(GscError::InvalidArgument("max_iter must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(GscError::InvalidArgument("restarts must be positive".into()));
        }
        Ok(())
    }
}

/// `q(w) = w'Gw − 2l'w + c`.
///
/// Problems assembled from stacked residuals also keep `scale·‖Aw − b‖²`,
/// which evaluates the objective without the cancellation of the expanded
/// form near a perfect fit.
#[derive(Debug, Clone)]
pub struct SimplexQp {
    pub gram: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
    residual: Option<(DMatrix<f64>, DVector<f64>, f64)>,
}

impl SimplexQp {
    pub fn new(gram: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Result<Self> {
        let n = gram.nrows();
        if n == 0 || gram.ncols() != n || linear.len() != n {
            return Err(GscError::Dimension(format!(
                "gram {}x{} with linear term of length {}",
                gram.nrows(),
                gram.ncols(),
                linear.len()
            )));
        }
        let scale = gram.amax().max(1.0);
        if crate::linalg::max_asymmetry(&gram) > 1e-12 * scale {
            return Err(GscError::InvalidArgument("gram matrix is not symmetric".into()));
        }
        if !constant.is_finite() || gram.iter().chain(linear.iter()).any(|x| !x.is_finite()) {
            return Err(GscError::InvalidArgument("non-finite QP data".into()));
        }
        Ok(Self {
            gram: crate::linalg::symmetrize(&gram),
            linear,
            constant,
            residual: None,
        })
    }

    /// `scale·‖Aw − b‖²`.
    pub fn from_residual(a: DMatrix<f64>, b: DVector<f64>, scale: f64) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(GscError::Dimension(format!(
                "{} residual rows against {} targets",
                a.nrows(),
                b.len()
            )));
        }
        let gram = a.transpose() * &a * scale;
        let linear = a.transpose() * &b * scale;
        let constant = b.norm_squared() * scale;
        let mut qp = Self::new(gram, linear, constant)?;
        qp.residual = Some((a, b, scale));
        Ok(qp)
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        match &self.residual {
            Some((a, b, scale)) => (a * &w - b).norm_squared() * scale,
            None => (w.dot(&(&self.gram * &w)) - 2.0 * self.linear.dot(&w) + self.constant).max(0.0),
        }
    }

    /// `∇q(w) = 2(Gw − l)`.
    pub fn gradient(&self, w: &[f64]) -> DVector<f64> {
        let w = DVector::from_column_slice(w);
        (&self.gram * w - &self.linear) * 2.0
    }
}

fn stack_residual(columns: &[Vec<&[f64]>], targets: &[&[f64]], scale: f64) -> Result<SimplexQp> {
    let n = columns[0].len();
    let rows: usize = targets.iter().map(|t| t.len()).sum();
    let mut a = DMatrix::zeros(rows, n);
    let mut b = DVector::zeros(rows);
    let mut r0 = 0;
    for (cols, target) in columns.iter().zip(targets) {
        if cols.len() != n {
            return Err(GscError::Dimension(format!(
                "{} columns where {n} were expected",
                cols.len()
            )));
        }
        let len = target.len();
        for (j, c) in cols.iter().enumerate() {
            if c.len() != len {
                return Err(GscError::Dimension(format!(
                    "coordinate vector of length {} against target of length {len}",
                    c.len()
                )));
            }
            for (i, x) in c.iter().enumerate() {
                a[(r0 + i, j)] = *x;
            }
        }
        for (i, x) in target.iter().enumerate() {
            b[r0 + i] = *x;
        }
        r0 += len;
    }
    SimplexQp::from_residual(a, b, scale)
}

/// Unit-weight problem `(1/T0) Σ_t ‖y_t − C_t w‖²` from per-period
/// `(treated, controls)` coordinates. Coordinates must be isometric (see
/// [`crate::spaces::isometric_coordinates`]) for the objective to equal the
/// mean squared distance.
pub fn build_unit_weight_qp(periods: &[(Vec<f64>, Vec<Vec<f64>>)]) -> Result<SimplexQp> {
    if periods.is_empty() || periods[0].1.is_empty() {
        return Err(GscError::Dimension("no pre-periods or no controls".into()));
    }
    let cols: Vec<Vec<&[f64]>> = periods
        .iter()
        .map(|(_, c)| c.iter().map(Vec::as_slice).collect())
        .collect();
    let targets: Vec<&[f64]> = periods.iter().map(|(y, _)| y.as_slice()).collect();
    stack_residual(&cols, &targets, 1.0 / periods.len() as f64)
}

/// Time-weight problem `(1/J) Σ_j ‖m_j − Σ_s λ_s Y_{j,s}‖²`, where
/// `pre[j][s]` holds control `j` at pre-period `s` and `post_means[j]` its
/// post-period mean.
pub fn build_time_weight_qp(pre: &[Vec<Vec<f64>>], post_means: &[Vec<f64>]) -> Result<SimplexQp> {
    if pre.is_empty() || pre.len() != post_means.len() || pre[0].is_empty() {
        return Err(GscError::Dimension(format!(
            "{} control pre-period blocks and {} post means",
            pre.len(),
            post_means.len()
        )));
    }
    let cols: Vec<Vec<&[f64]>> = pre
        .iter()
        .map(|c| c.iter().map(Vec::as_slice).collect())
        .collect();
    let targets: Vec<&[f64]> = post_means.iter().map(Vec::as_slice).collect();
    stack_residual(&cols, &targets, 1.0 / pre.len() as f64)
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub weights: SimplexWeights,
    pub objective: f64,
    pub iterations: usize,
    /// Norm of the gradient projected onto the tangent cone of the simplex.
    pub kkt_residual: f64,
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// `min_ν ‖(g − ν)_S, min(g − ν, 0)_{S^c}‖` where `S` is the support of `w`:
/// the distance from `g` to the normal cone, i.e. first-order
/// stationarity error.
pub fn kkt_residual(w: &[f64], g: &[f64]) -> f64 {
    let support: Vec<f64> = w.iter().zip(g).filter(|(x, _)| **x > 0.0).map(|(_, y)| *y).collect();
    let mut outside: Vec<f64> = w.iter().zip(g).filter(|(x, _)| **x <= 0.0).map(|(_, y)| *y).collect();
    outside.sort_by(f64::total_cmp);
    let mut sum: f64 = support.iter().sum();
    let mut count = support.len();
    // Outside coordinates with g_i < ν join the average, smallest first.
    let mut k = 0;
    let mut nu = sum / count as f64;
    while k < outside.len() && outside[k] < nu {
        sum += outside[k];
        count += 1;
        k += 1;
        nu = sum / count as f64;
    }
    let s: f64 = support.iter().map(|x| (x - nu) * (x - nu)).sum::<f64>()
        + outside.iter().map(|x| (x - nu).min(0.0).powi(2)).sum::<f64>();
    s.sqrt()
}

fn relative_kkt(qp: &SimplexQp, w: &[f64]) -> (f64, f64) {
    let g = qp.gradient(w);
    let r = kkt_residual(w, g.as_slice());
    (r, r / (1.0 + g.norm()))
}

/// Objective gap below which a point counts as tied with uniform weights.
const TIE_TOL: f64 = 1e-14;

/// Solves `min q(w)` over the simplex.
///
/// Starts from uniform weights, so among several minimizers the one reached
/// from the barycenter is reported; a constant objective returns uniform
/// weights.
pub fn solve_simplex_qp(qp: &SimplexQp, cfg: &SolverConfig) -> Result<SimplexSolution> {
    cfg.validate()?;
    let n = qp.dim();
    let uniform = SimplexWeights::uniform(n);
    if n == 1 {
        return Ok(SimplexSolution {
            objective: qp.objective(uniform.values()),
            weights: uniform,
            iterations: 0,
            kkt_residual: 0.0,
        });
    }
    let lipschitz = 2.0 * crate::linalg::spectral_norm(&qp.gram);
    let (mut w, iterations) = if lipschitz <= f64::MIN_POSITIVE {
        (linear_minimizer(qp), 0)
    } else {
        fista(qp, cfg, lipschitz)
    };
    if let Some(polished) = active_set_polish(qp, &w, n) {
        // Keep the iterate reached from the barycenter unless the polish
        // improves the objective or is needed to certify stationarity.
        let (_, rel_old) = relative_kkt(qp, &w);
        let (_, rel_new) = relative_kkt(qp, &polished);
        let better = qp.objective(&polished) < qp.objective(&w);
        if better || (rel_old > cfg.tol_kkt && rel_new < rel_old) {
            w = polished;
        }
    }
    let mut best = qp.objective(&w);
    for i in 0..n {
        let v = SimplexWeights::vertex(n, i);
        let f = qp.objective(v.values());
        if f < best {
            best = f;
            w = v.into_vec();
        }
    }
    // Ties with the starting point, up to rounding, resolve to it exactly.
    let f_uniform = qp.objective(uniform.values());
    if f_uniform <= best + TIE_TOL * (1.0 + qp.constant.abs()) {
        best = f_uniform;
        w = uniform.values().to_vec();
    }
    let (residual, rel) = relative_kkt(qp, &w);
    if rel > cfg.tol_kkt {
        return Err(GscError::NotConverged {
            what: "simplex QP",
            iterations,
            residual: rel,
        });
    }
    Ok(SimplexSolution {
        weights: SimplexWeights::normalized(w),
        objective: best,
        iterations,
        kkt_residual: residual,
    })
}

/// Minimizer of `−2l'w` when the quadratic part vanishes: uniform over the
/// largest entries of `l`.
fn linear_minimizer(qp: &SimplexQp) -> Vec<f64> {
    let top = qp.linear.max();
    let scale = qp.linear.amax().max(1.0);
    let hits: Vec<bool> = qp.linear.iter().map(|&x| x >= top - 1e-14 * scale).collect();
    let k = hits.iter().filter(|&&h| h).count() as f64;
    hits.iter().map(|&h| if h { 1.0 / k } else { 0.0 }).collect()
}

fn fista(qp: &SimplexQp, cfg: &SolverConfig, lipschitz: f64) -> (Vec<f64>, usize) {
    let n = qp.dim();
    let step = 1.0 / lipschitz;
    let mut x = vec![1.0 / n as f64; n];
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut fx = qp.objective(&x);
    for it in 0..cfg.max_iter {
        let g = qp.gradient(&y);
        let trial: Vec<f64> = y.iter().zip(g.iter()).map(|(a, b)| a - step * b).collect();
        let x_new = project_to_simplex(&trial);
        let f_new = qp.objective(&x_new);
        if f_new > fx {
            // Adaptive restart: drop momentum and retry from x.
            y = x.clone();
            t = 1.0;
            if it > 0 && relative_kkt(qp, &x).1 <= cfg.tol_kkt {
                return (x, it);
            }
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_new;
        y = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| a + mom * (a - b))
            .collect();
        let moved = x_new.iter().zip(&x).any(|(a, b)| a != b);
        x = x_new;
        fx = f_new;
        t = t_new;
        if !moved || (it % 16 == 0 && relative_kkt(qp, &x).1 <= cfg.tol_kkt) {
            return (x, it + 1);
        }
    }
    (x, cfg.max_iter)
}

/// Minimizer of `q` over `{w : Σw = 1, w_i = 0 for i ∉ S}` (min-norm when
/// not unique).
fn equality_solve(qp: &SimplexQp, support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    let mut rhs = DVector::zeros(k + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = 2.0 * qp.gram[(i, j)];
        }
        kkt[(a, k)] = 1.0;
        kkt[(k, a)] = 1.0;
        rhs[a] = 2.0 * qp.linear[i];
    }
    rhs[k] = 1.0;
    let svd = kkt.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&rhs, eps).ok()?;
    let n = qp.dim();
    let mut w = vec![0.0; n];
    for (a, &i) in support.iter().enumerate() {
        w[i] = sol[a];
    }
    w.iter().all(|x| x.is_finite()).then_some(w)
}

/// Primal active-set iterations starting from the support of `w0`.
fn active_set_polish(qp: &SimplexQp, w0: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut w = w0.to_vec();
    let mut working: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
    for _ in 0..(4 * n + 16) {
        let p = equality_solve(qp, &working)?;
        if working.iter().all(|&i| p[i] >= 0.0) {
            w = p;
            let g = qp.gradient(&w);
            let nu = working.iter().map(|&i| g[i]).sum::<f64>() / working.len() as f64;
            let scale = 1e-12 * (1.0 + g.amax());
            let entering = (0..n)
                .filter(|i| !working.contains(i))
                .map(|i| (i, g[i] - nu))
                .filter(|&(_, m)| m < -scale)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match entering {
                Some((i, _)) => {
                    working.push(i);
                    working.sort_unstable();
                }
                None => return Some(w),
            }
        } else {
            // Ratio test along w → p; drop the first blocking coordinate.
            let mut alpha = 1.0;
            let mut block = None;
            for &i in &working {
                let d = p[i] - w[i];
                if d < 0.0 {
                    let a = w[i] / -d;
                    if a < alpha {
                        alpha = a;
                        block = Some(i);
                    }
                }
            }
            for &i in &working {
                w[i] += alpha * (p[i] - w[i]);
            }
            if let Some(b) = block {
                w[b] = 0.0;
                working.retain(|&i| i != b);
            }
            for x in w.iter_mut() {
                *x = x.max(0.0);
            }
            if working.is_empty() {
                return None;
            }
        }
    }
    None
}

/// Derivative-free minimization over the simplex.
///
/// Nelder–Mead runs in additive-log-ratio coordinates
/// `w_i ∝ exp(z_i)`, `w_n ∝ 1`, so every iterate is feasible. The first run
/// starts at the barycenter; later runs alternate between restarting at the
/// incumbent and at random points drawn from `cfg.seed`. Uniform weights and
/// the vertices shrunk by 1e-6 toward the barycenter are also evaluated, and
/// the best point wins with ties going to uniform weights.
pub fn solve_simplex_derivative_free<F>(
    mut objective: F,
    n: usize,
    cfg: &SolverConfig,
) -> Result<SimplexSolution>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if n == 0 {
        return Err(GscError::InvalidArgument("no weights to optimize".into()));
    }
    let mut eval = |w: &[f64]| -> Result<f64> {
        let f = objective(w)?;
        if f.is_finite() {
            Ok(f)
        } else {
            Err(GscError::NonFiniteObjective(w.to_vec()))
        }
    };
    let uniform = SimplexWeights::uniform(n);
    let mut best_w = uniform.values().to_vec();
    let mut best_f = eval(&best_w)?;
    let mut iterations = 0;
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best_z = vec![0.0; n - 1];
        for run in 0..cfg.restarts {
            let start: Vec<f64> = if run % 2 == 1 {
                (0..n - 1)
                    .map(|_| {
                        let x: f64 = StandardNormal.sample(&mut rng);
                        2.0 * x
                    })
                    .collect()
            } else {
                best_z.clone()
            };
            let (z, f, it) = nelder_mead(&mut eval, &start, 1.0, cfg.max_iter)?;
            iterations += it;
            if f < best_f {
                best_f = f;
                best_w = alr_to_simplex(&z);
                best_z = z;
            }
        }
        const DELTA: f64 = 1e-6;
        for i in 0..n {
            let w: Vec<f64> = (0..n)
                .map(|k| {
                    let e = if k == i { 1.0 } else { 0.0 };
                    (1.0 - DELTA) * e + DELTA / n as f64
                })
                .collect();
            let f = eval(&w)?;
            if f < best_f {
                best_f = f;
                best_w = w;
            }
        }
        let f_uniform = eval(uniform.values())?;
        if f_uniform <= best_f + TIE_TOL * (1.0 + f_uniform.abs()) {
            best_f = f_uniform;
            best_w = uniform.values().to_vec();
        }
    }
    Ok(SimplexSolution {
        weights: SimplexWeights::normalized(best_w),
        objective: best_f,
        iterations,
        kkt_residual: f64::NAN,
    })
}

pub(crate) fn alr_to_simplex(z: &[f64]) -> Vec<f64> {
    let m = z.iter().fold(0.0_f64, |a, &b| a.max(b));
    let mut w: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    w.push((-m).exp());
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Adaptive Nelder–Mead (dimension-dependent coefficients). Stops when the
/// largest vertex distance from the best vertex drops below 1e-9.
fn nelder_mead<F>(
    eval: &mut F,
    start: &[f64],
    step: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = start.len();
    let nf = dim as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut f = |z: &[f64]| eval(&alr_to_simplex(z));
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), f(start)?));
    for i in 0..dim {
        let mut z = start.to_vec();
        z[i] += step;
        let fz = f(&z)?;
        simplex.push((z, fz));
    }
    let mut it = 0;
    while it < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(z, _)| {
                z.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if diameter < 1e-9 {
            break;
        }
        it += 1;
        let mut centroid = vec![0.0; dim];
        for (z, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(z) {
                *c += x / nf;
            }
        }
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(alpha);
        let fr = f(&xr)?;
        let (best_f, second_worst_f) = (simplex[0].1, simplex[dim - 1].1);
        if fr < best_f {
            let xe = along(alpha * gamma);
            let fe = f(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second_worst_f {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(alpha * rho);
            let fc = f(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = f(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let z: Vec<f64> = best
                .iter()
                .zip(&v.0)
                .map(|(b, x)| b + sigma * (x - b))
                .collect();
            let fz = f(&z)?;
            *v = (z, fz);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (z, fz) = simplex.swap_remove(0);
    Ok((z, fz, it))
}

#[cfg(test)]
mod tests;
