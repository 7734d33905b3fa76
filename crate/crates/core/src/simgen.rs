//! Simulated panels with known counterfactuals.
//!
//! Periods are numbered `t = 1..=T` in the generating formulas and stored
//! 0-based in the panel (`panel` period `k` is formula period `k + 1`).
//! Control units are numbered `j = 2..=J+1` in the formulas, matching panel
//! unit `j - 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{GscError, Result};
use crate::estimators::{CovariatePanel, Panel};
use crate::linalg::{symmetrize, to_row_major};
use crate::simplex::SimplexWeights;
use crate::spaces::sample::random_point;
use crate::spaces::{
    flat_restore, geodesic_eval, sphere_exp, sphere_log, sphere_parallel_transport,
    weighted_frechet_mean, FlatCoordinates, ObjectPoint, SpaceDescriptor, SpaceKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Network,
    Spd,
    Sphere,
    Scalar,
    RobustnessS2,
    RobustnessS3,
    /// Outcomes linear in Euclidean covariates with the treated covariate
    /// outside the donors' hull.
    CovariateOffset,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Network,
        Scenario::Spd,
        Scenario::Sphere,
        Scenario::Scalar,
        Scenario::RobustnessS2,
        Scenario::RobustnessS3,
        Scenario::CovariateOffset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Network => "network",
            Scenario::Spd => "spd",
            Scenario::Sphere => "sphere",
            Scenario::Scalar => "scalar",
            Scenario::RobustnessS2 => "robustness_s2",
            Scenario::RobustnessS3 => "robustness_s3",
            Scenario::CovariateOffset => "covariate_offset",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub t: usize,
    pub t0: usize,
    pub j: usize,
    pub seed: u64,
    /// Fraction of the geodesic from the counterfactual toward a random
    /// target at which the treated post-period outcome is observed.
    pub effect_size: f64,
    /// Replaces the scenario's default outcome space where the scenario
    /// supports it.
    pub space: Option<SpaceDescriptor>,
}

impl SimConfig {
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        Self {
            scenario,
            t: 20,
            t0: 19,
            j: 20,
            seed,
            effect_size: 0.0,
            space: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t0 < 1 || self.t0 >= self.t {
            return Err(GscError::InvalidArgument(format!(
                "need 1 <= T0 < T, got T0 = {} and T = {}",
                self.t0, self.t
            )));
        }
        if self.j < 2 {
            return Err(GscError::InvalidArgument(format!("need J >= 2 controls, got {}", self.j)));
        }
        if !(0.0..=1.0).contains(&self.effect_size) {
            return Err(GscError::InvalidArgument(format!(
                "effect_size {} outside [0,1]",
                self.effect_size
            )));
        }
        Ok(())
    }
}

/// Which identifying assumption the generated panel satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// Exact pre-period fit by a donor combination.
    SyntheticControl,
    /// Geodesic parallel trends.
    ParallelTrend,
}

/// Generating parameters. Unit vectors indexed by panel unit exclude the
/// treated unit unless stated otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum SimTruth {
    /// `Y_{j,t} = e_{j,t} L(A_j)` with edge weight
    /// `e_{j,t} = (1 − α_t) μ_t + α_t U_j` on the fixed support `A_j`.
    Network {
        supports: Vec<ObjectPoint>,
        trend: Vec<f64>,
        latent: Vec<f64>,
        alpha: Vec<f64>,
        w_star: Vec<f64>,
    },
    /// `Y_{j,t} = γ_{μ_t, U_j}(α_t)`; `latent[0]` is the treated `U_1`.
    Geodesic {
        mu: Vec<ObjectPoint>,
        latent: Vec<ObjectPoint>,
        alpha: Vec<f64>,
        alpha_clamped: Vec<bool>,
        w_star: Vec<f64>,
    },
    /// `Y_{j,t} = Exp_{μ_t}(a_t PT_{U_1→μ_t} Log_{U_1} U_j)` with `U_1` the
    /// intrinsic `w*`-mean of the controls; `latent[0]` is `U_1`.
    Sphere {
        mu: Vec<ObjectPoint>,
        scale: Vec<f64>,
        latent: Vec<ObjectPoint>,
        w_star: Vec<f64>,
    },
    /// Flat-chart `Y_{j,t} = v_t + h_t u_j`; `unit_effects[0]` is the
    /// treated unit.
    TwoWay {
        unit_effects: Vec<Vec<f64>>,
        time_effects: Vec<Vec<f64>>,
        trend: Vec<f64>,
        w_star: Option<Vec<f64>>,
        holds: Vec<Assumption>,
    },
    /// Flat-chart `Y_{j,t} = a_t + Σ_k Z_{j,k} b_{t,k}`; `covariates[0]` is
    /// the treated unit.
    Linear {
        intercept: Vec<Vec<f64>>,
        slopes: Vec<Vec<Vec<f64>>>,
        covariates: Vec<Vec<f64>>,
    },
}

impl SimTruth {
    pub fn w_star(&self) -> Option<&[f64]> {
        match self {
            SimTruth::Network { w_star, .. }
            | SimTruth::Geodesic { w_star, .. }
            | SimTruth::Sphere { w_star, .. } => Some(w_star),
            SimTruth::TwoWay { w_star, .. } => w_star.as_deref(),
            SimTruth::Linear { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub config: SimConfig,
    pub panel: Panel,
    /// `Y_{1,t}(N)` for the post periods, in order.
    pub counterfactual: Vec<ObjectPoint>,
    pub truth: SimTruth,
    pub covariates: Option<CovariatePanel>,
}

/// Raw edge-weight formula `sin(0.1πt) + e^{−0.1t}((0.1j − 0.5)² − sin(0.1πt))`.
/// It is negative for some `t`; the simulator shifts it by one.
pub fn network_edge_weight(t: f64, j: f64) -> f64 {
    let s = (0.1 * PI * t).sin();
    s + (-0.1 * t).exp() * ((0.1 * j - 0.5).powi(2) - s)
}

/// Simulates the configured scenario.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Network => gen_network_panel(cfg),
        Scenario::Spd => gen_spd_panel(cfg),
        Scenario::Sphere => gen_sphere_panel(cfg),
        Scenario::Scalar => gen_scalar_panel(cfg),
        Scenario::RobustnessS2 | Scenario::RobustnessS3 => gen_robustness_panel(cfg),
        Scenario::CovariateOffset => gen_covariate_offset_panel(cfg),
    }
}

/// Stored `Y_{1,t}(N)` for 0-based period `t >= T0`.
pub fn oracle_counterfactual(output: &SimOutput, t: usize) -> Result<ObjectPoint> {
    let t0 = output.panel.t0();
    if t < t0 || t >= output.panel.n_periods() {
        return Err(GscError::InvalidArgument(format!(
            "period {t} is not a post-treatment period (T0 = {t0}, T = {})",
            output.panel.n_periods()
        )));
    }
    Ok(output.counterfactual[t - t0].clone())
}

/// Recomputes `Y_{1,t}(N)` for any 0-based period from the truth alone.
pub fn regenerate_treated(truth: &SimTruth, space: &Arc<SpaceDescriptor>, t: usize) -> Result<ObjectPoint> {
    match truth {
        SimTruth::Network {
            supports,
            trend,
            latent,
            alpha,
            w_star,
        } => {
            let mut acc = vec![0.0; space.data_len()];
            for ((l, u), w) in supports.iter().zip(latent).zip(w_star) {
                let e = (1.0 - alpha[t]) * trend[t] + alpha[t] * u;
                for (a, x) in acc.iter_mut().zip(l.data()) {
                    *a += w * e * x;
                }
            }
            ObjectPoint::validated(space, acc)
        }
        SimTruth::Geodesic {
            mu, latent, alpha, ..
        } => geodesic_eval(&mu[t], &latent[0], alpha[t]),
        SimTruth::Sphere { mu, .. } => Ok(mu[t].clone()),
        SimTruth::TwoWay {
            unit_effects,
            time_effects,
            trend,
            ..
        } => chart_point(
            space,
            time_effects[t]
                .iter()
                .zip(&unit_effects[0])
                .map(|(v, u)| v + trend[t] * u)
                .collect(),
        ),
        SimTruth::Linear {
            intercept,
            slopes,
            covariates,
        } => chart_point(space, linear_outcome(&intercept[t], &slopes[t], &covariates[0])),
    }
}

fn rng_for(cfg: &SimConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Sparse random donor weights: 2 to 5 donors with weights bounded away
/// from zero.
fn draw_w_star<R: Rng + ?Sized>(rng: &mut R, j: usize) -> Vec<f64> {
    let k = rng.random_range(2..=5.min(j));
    let mut w = vec![0.0; j];
    for i in sample(rng, j, k) {
        w[i] = rng.random_range(0.2..1.0);
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

fn resolve_space(cfg: &SimConfig, default: SpaceDescriptor, allowed: impl Fn(&SpaceDescriptor) -> bool) -> Result<Arc<SpaceDescriptor>> {
    let space = cfg.space.clone().unwrap_or(default);
    if !allowed(&space) {
        return Err(GscError::InvalidArgument(format!(
            "scenario {} does not support the {} space",
            cfg.scenario,
            space.kind()
        )));
    }
    Ok(space.into_shared())
}

fn chart_point(space: &Arc<SpaceDescriptor>, v: Vec<f64>) -> Result<ObjectPoint> {
    Ok(flat_restore(&FlatCoordinates { vector: v }, space, false)?.point)
}

fn labels(n: usize, prefix: &str) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Assembles the output: displaces the treated post-period outcomes toward
/// a random target by `effect_size` and labels units and periods.
fn finish<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
    space: Arc<SpaceDescriptor>,
    mut outcomes: Vec<Vec<ObjectPoint>>,
    truth: SimTruth,
    covariates: Option<CovariatePanel>,
) -> Result<SimOutput> {
    let counterfactual = outcomes[0][cfg.t0..].to_vec();
    let target = random_point(&space, rng);
    if cfg.effect_size > 0.0 {
        for y in &mut outcomes[0][cfg.t0..] {
            *y = geodesic_eval(y, &target, cfg.effect_size)?;
        }
    }
    let mut units = vec!["treated".to_string()];
    units.extend(labels(cfg.j, "control"));
    let panel = Panel::new(space, outcomes, cfg.t0, units, labels(cfg.t, "t"))?;
    Ok(SimOutput {
        config: cfg.clone(),
        panel,
        counterfactual,
        truth,
        covariates,
    })
}

fn sbm_laplacian<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut l = vec![0.0; m * m];
    let half = m / 2;
    for a in 0..m {
        for b in (a + 1)..m {
            let p = if (a < half) == (b < half) { 0.75 } else { 0.1 };
            if rng.random_bool(p) {
                l[a * m + b] = -1.0;
                l[b * m + a] = -1.0;
                l[a * m + a] += 1.0;
                l[b * m + b] += 1.0;
            }
        }
    }
    l
}

/// Weighted stochastic block model networks: 10 nodes in two communities,
/// edge probabilities 0.75 within and 0.1 between, supports drawn once per
/// unit. Edge weights follow the shifted formula `1 + network_edge_weight`,
/// which keeps the geodesic form with trend `1 + sin(0.1πt)`, latent
/// `1 + (0.1j − 0.5)²` and `α_t = e^{−0.1t}`.
pub fn gen_network_panel(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let space = resolve_space(cfg, SpaceDescriptor::laplacian(10), |s| s.kind() == SpaceKind::Laplacian)?;
    let m = space.dim();
    let mut rng = rng_for(cfg);
    let supports: Vec<ObjectPoint> = (0..cfg.j)
        .map(|_| ObjectPoint::validated(&space, sbm_laplacian(&mut rng, m)))
        .collect::<Result<_>>()?;
    let w_star = draw_w_star(&mut rng, cfg.j);
    let times: Vec<f64> = (1..=cfg.t).map(|t| t as f64).collect();
    let trend: Vec<f64> = times.iter().map(|t| 1.0 + (0.1 * PI * t).sin()).collect();
    let alpha: Vec<f64> = times.iter().map(|t| (-0.1 * t).exp()).collect();
    let latent: Vec<f64> = (0..cfg.j)
        .map(|k| 1.0 + (0.1 * (k + 2) as f64 - 0.5).powi(2))
        .collect();
    let mut outcomes = vec![Vec::with_capacity(cfg.t)];
    for (k, l) in supports.iter().enumerate() {
        let row = times
            .iter()
            .map(|&t| {
                let e = 1.0 + network_edge_weight(t, (k + 2) as f64);
                ObjectPoint::validated(&space, l.data().iter().map(|x| e * x).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        outcomes.push(row);
    }
    let w = SimplexWeights::new(w_star.clone())?;
    for t in 0..cfg.t {
        let controls: Vec<&ObjectPoint> = outcomes[1..].iter().map(|r| &r[t]).collect();
        let treated = weighted_frechet_mean(&controls, &w)?;
        outcomes[0].push(treated);
    }
    let truth = SimTruth::Network {
        supports,
        trend,
        latent,
        alpha,
        w_star,
    };
    finish(cfg, &mut rng, space, outcomes, truth, None)
}

/// Wishart draw by the Bartlett decomposition with scale `s·I`.
fn wishart<R: Rng + ?Sized>(rng: &mut R, m: usize, df: f64, s: f64) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        let chi = ChiSquared::new(df - i as f64)
            .map_err(|e| GscError::InvalidArgument(format!("Wishart degrees of freedom: {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
        for k in 0..i {
            a[(i, k)] = normal(rng);
        }
    }
    Ok(symmetrize(&(&a * a.transpose() * s)))
}

fn spd_draw<R: Rng + ?Sized>(rng: &mut R, space: &Arc<SpaceDescriptor>) -> Result<DMatrix<f64>> {
    let m = space.dim();
    loop {
        let w = wishart(rng, m, 12.0_f64.max(m as f64), 0.1)?;
        if w.clone().symmetric_eigenvalues().min() > 1e-8 {
            return Ok(w);
        }
    }
}

/// Clamps `α` into `[0.01, 0.99]`, reporting whether it moved.
fn clamp_alpha(a: f64) -> (f64, bool) {
    let c = a.clamp(0.01, 0.99);
    (c, c != a)
}

/// SPD matrices (default 10×10, Log-Euclidean): Wishart `μ` and `U` with 12
/// degrees of freedom and scale `0.1·I`, `μ_t = 0.1tμ`,
/// `U_j = e^{(0.1j−0.5)²}U` and `α_t = log(0.1(t+1))` clamped to
/// `[0.01, 0.99]`.
pub fn gen_spd_panel(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let space = resolve_space(cfg, SpaceDescriptor::spd_log_euclidean(10), |s| s.kind().is_spd())?;
    let mut rng = rng_for(cfg);
    let mu = spd_draw(&mut rng, &space)?;
    let u = spd_draw(&mut rng, &space)?;
    let point = |a: &DMatrix<f64>| ObjectPoint::validated(&space, to_row_major(a));
    let mu_t = (1..=cfg.t)
        .map(|t| point(&(&mu * (0.1 * t as f64))))
        .collect::<Result<Vec<_>>>()?;
    let controls = (0..cfg.j)
        .map(|k| point(&(&u * (0.1 * (k + 2) as f64 - 0.5).powi(2).exp())))
        .collect::<Result<Vec<_>>>()?;
    let (alpha, alpha_clamped): (Vec<f64>, Vec<bool>) = (1..=cfg.t)
        .map(|t| clamp_alpha((0.1 * (t as f64 + 1.0)).ln()))
        .unzip();
    if alpha_clamped.iter().any(|&c| c) {
        log::info!(
            "alpha_t clamped to [0.01, 0.99] in {} of {} periods",
            alpha_clamped.iter().filter(|&&c| c).count(),
            cfg.t
        );
    }
    let w_star = draw_w_star(&mut rng, cfg.j);
    geodesic_model(cfg, &mut rng, space, mu_t, controls, alpha, alpha_clamped, w_star)
}

/// Shared flat-chart geodesic model: the treated latent is the `w*`-mean of
/// the control latents, so the treated path is the same combination of
/// the control paths.
#[allow(clippy::too_many_arguments)]
fn geodesic_model<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
    space: Arc<SpaceDescriptor>,
    mu: Vec<ObjectPoint>,
    controls: Vec<ObjectPoint>,
    alpha: Vec<f64>,
    alpha_clamped: Vec<bool>,
    w_star: Vec<f64>,
) -> Result<SimOutput> {
    let refs: Vec<&ObjectPoint> = controls.iter().collect();
    let treated_latent = weighted_frechet_mean(&refs, &SimplexWeights::new(w_star.clone())?)?;
    let mut latent = vec![treated_latent];
    latent.extend(controls);
    let outcomes = latent
        .iter()
        .map(|u| {
            mu.iter()
                .zip(&alpha)
                .map(|(m, &a)| geodesic_eval(m, u, a))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = SimTruth::Geodesic {
        mu,
        latent,
        alpha,
        alpha_clamped,
        w_star,
    };
    finish(cfg, rng, space, outcomes, truth, None)
}

/// Generic flat-chart geodesic panel with random trend points, latents and
/// `α_t ∈ (0.2, 0.9)`. Used for the scalar scenario and for any flat space.
pub fn gen_geodesic_panel(cfg: &SimConfig, space: &Arc<SpaceDescriptor>) -> Result<SimOutput> {
    cfg.validate()?;
    if !space.is_flat() {
        return Err(GscError::InvalidArgument(format!(
            "the geodesic panel needs a flat chart, {} has none",
            space.kind()
        )));
    }
    let mut rng = rng_for(cfg);
    let mu: Vec<ObjectPoint> = (0..cfg.t).map(|_| random_point(space, &mut rng)).collect();
    let controls: Vec<ObjectPoint> = (0..cfg.j).map(|_| random_point(space, &mut rng)).collect();
    let alpha: Vec<f64> = (0..cfg.t).map(|_| rng.random_range(0.2..0.9)).collect();
    let w_star = draw_w_star(&mut rng, cfg.j);
    geodesic_model(cfg, &mut rng, Arc::clone(space), mu, controls, alpha, vec![false; cfg.t], w_star)
}

fn gen_scalar_panel(cfg: &SimConfig) -> Result<SimOutput> {
    let space = resolve_space(cfg, SpaceDescriptor::scalar(), |s| s.is_flat())?;
    gen_geodesic_panel(cfg, &space)
}

/// Point near the orthant centre, at angular spread roughly `spread`.
fn near_centre<R: Rng + ?Sized>(rng: &mut R, space: &Arc<SpaceDescriptor>, spread: f64) -> Result<ObjectPoint> {
    let d = space.dim();
    loop {
        let v: Vec<f64> = (0..d).map(|_| 1.0 / (d as f64).sqrt() + spread * normal(rng)).collect();
        if v.iter().all(|&x| x > 0.02) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            return ObjectPoint::validated(space, v.iter().map(|x| x / n).collect());
        }
    }
}

/// Sphere outcomes (default `S²` in `R³`) from the Exp/Log model with
/// `A_t = a_t I`, `a_t ∈ (0.3, 0.9)`. Draws leaving the positive orthant are
/// resampled.
pub fn gen_sphere_panel(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let space = resolve_space(cfg, SpaceDescriptor::sphere(3), |s| s.kind() == SpaceKind::Sphere)?;
    let mut rng = rng_for(cfg);
    const ATTEMPTS: usize = 1000;
    for _ in 0..ATTEMPTS {
        let mu = (0..cfg.t)
            .map(|_| near_centre(&mut rng, &space, 0.15))
            .collect::<Result<Vec<_>>>()?;
        let scale: Vec<f64> = (0..cfg.t).map(|_| rng.random_range(0.3..0.9)).collect();
        let controls = (0..cfg.j)
            .map(|_| near_centre(&mut rng, &space, 0.25))
            .collect::<Result<Vec<_>>>()?;
        let w_star = draw_w_star(&mut rng, cfg.j);
        let refs: Vec<&ObjectPoint> = controls.iter().collect();
        let u1 = weighted_frechet_mean(&refs, &SimplexWeights::new(w_star.clone())?)?;
        let Ok(rows) = sphere_rows(&mu, &scale, &u1, &controls) else {
            continue;
        };
        let mut outcomes = vec![mu.clone()];
        outcomes.extend(rows);
        let mut latent = vec![u1];
        latent.extend(controls);
        let truth = SimTruth::Sphere {
            mu,
            scale,
            latent,
            w_star,
        };
        return finish(cfg, &mut rng, space, outcomes, truth, None);
    }
    Err(GscError::InvalidArgument(format!(
        "no sphere panel inside the positive orthant after {ATTEMPTS} draws"
    )))
}

fn sphere_rows(
    mu: &[ObjectPoint],
    scale: &[f64],
    u1: &ObjectPoint,
    controls: &[ObjectPoint],
) -> Result<Vec<Vec<ObjectPoint>>> {
    controls
        .iter()
        .map(|u| {
            let v = sphere_log(u1, u)?;
            mu.iter()
                .zip(scale)
                .map(|(m, &a)| {
                    let moved = sphere_parallel_transport(u1, m, &v)?;
                    sphere_exp(m, &moved.scaled(a))
                })
                .collect()
        })
        .collect()
}

fn two_way_space(cfg: &SimConfig) -> Result<Arc<SpaceDescriptor>> {
    resolve_space(cfg, SpaceDescriptor::scalar(), |s| s.kind() == SpaceKind::L2Function)
}

/// Two-way flat-chart panels `Y_{j,t} = v_t + h_t u_j` on scalar or
/// function spaces.
///
/// `robustness_s2`: `h_t = 1 + 3(t/T)³`, treated `u_1` an equal mix of the
/// two donors with the largest effects, so an exact donor fit exists but
/// parallel trends fail. `robustness_s3`: `h_t = 1`, treated `u_1` one unit
/// above the donors' coordinatewise maximum, so parallel trends hold but no
/// donor combination fits.
pub fn gen_robustness_panel(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let s2 = match cfg.scenario {
        Scenario::RobustnessS2 => true,
        Scenario::RobustnessS3 => false,
        other => {
            return Err(GscError::InvalidArgument(format!(
                "{other} is not a robustness scenario"
            )))
        }
    };
    let space = two_way_space(cfg)?;
    let n = space.data_len();
    let mut rng = rng_for(cfg);
    let controls: Vec<Vec<f64>> = (0..cfg.j)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let time_effects: Vec<Vec<f64>> = (0..cfg.t)
        .map(|_| (0..n).map(|_| normal(&mut rng)).collect())
        .collect();
    let (treated, trend, w_star, holds) = if s2 {
        let mut order: Vec<usize> = (0..cfg.j).collect();
        let total = |k: usize| controls[k].iter().sum::<f64>();
        order.sort_by(|&a, &b| total(b).total_cmp(&total(a)));
        let mut w = vec![0.0; cfg.j];
        w[order[0]] = 0.5;
        w[order[1]] = 0.5;
        let u1: Vec<f64> = (0..n)
            .map(|i| 0.5 * (controls[order[0]][i] + controls[order[1]][i]))
            .collect();
        let h = (1..=cfg.t)
            .map(|t| 1.0 + 3.0 * (t as f64 / cfg.t as f64).powi(3))
            .collect();
        (u1, h, Some(w), vec![Assumption::SyntheticControl])
    } else {
        let u1: Vec<f64> = (0..n)
            .map(|i| controls.iter().map(|u| u[i]).fold(f64::NEG_INFINITY, f64::max) + 1.0)
            .collect();
        (u1, vec![1.0; cfg.t], None, vec![Assumption::ParallelTrend])
    };
    let mut unit_effects = vec![treated];
    unit_effects.extend(controls);
    let outcomes = unit_effects
        .iter()
        .map(|u| {
            (0..cfg.t)
                .map(|t| {
                    let v = time_effects[t].iter().zip(u).map(|(v, x)| v + trend[t] * x).collect();
                    chart_point(&space, v)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = SimTruth::TwoWay {
        unit_effects,
        time_effects,
        trend,
        w_star,
        holds,
    };
    finish(cfg, &mut rng, space, outcomes, truth, None)
}

fn linear_outcome(intercept: &[f64], slopes: &[Vec<f64>], z: &[f64]) -> Vec<f64> {
    intercept
        .iter()
        .enumerate()
        .map(|(i, a)| a + slopes.iter().zip(z).map(|(b, zk)| zk * b[i]).sum::<f64>())
        .collect()
}

/// Outcomes linear in two Euclidean covariates with positive slopes,
/// donors' covariates in `(0,1)²` and the treated covariate at `(2.5, 2.5)`.
/// The covariates are returned as a one-period panel of scalar components.
pub fn gen_covariate_offset_panel(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    if cfg.j < 3 {
        return Err(GscError::InvalidArgument(
            "covariate_offset needs J >= 3 to identify two slopes".into(),
        ));
    }
    let space = two_way_space(cfg)?;
    let n = space.data_len();
    let mut rng = rng_for(cfg);
    const P: usize = 2;
    let mut covariates = vec![vec![2.5; P]];
    covariates.extend((0..cfg.j).map(|_| (0..P).map(|_| rng.random::<f64>()).collect::<Vec<_>>()));
    let intercept: Vec<Vec<f64>> = (0..cfg.t)
        .map(|_| (0..n).map(|_| normal(&mut rng)).collect())
        .collect();
    let slopes: Vec<Vec<Vec<f64>>> = (1..=cfg.t)
        .map(|t| {
            (0..P)
                .map(|k| vec![1.0 + 0.5 * ((t + k) as f64).sin(); n])
                .collect()
        })
        .collect();
    let outcomes = covariates
        .iter()
        .map(|z| {
            (0..cfg.t)
                .map(|t| chart_point(&space, linear_outcome(&intercept[t], &slopes[t], z)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let scalar = SpaceDescriptor::scalar().into_shared();
    let values = covariates
        .iter()
        .map(|z| {
            let comps = z
                .iter()
                .map(|&x| ObjectPoint::new(&scalar, vec![x]))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![comps])
        })
        .collect::<Result<Vec<_>>>()?;
    let cov_panel = CovariatePanel::new(vec![Arc::clone(&scalar); P], values)?;
    let truth = SimTruth::Linear {
        intercept,
        slopes,
        covariates,
    };
    finish(cfg, &mut rng, space, outcomes, truth, Some(cov_panel))
}
