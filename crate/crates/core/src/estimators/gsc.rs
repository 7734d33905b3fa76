use super::regression::fit_global_frechet_regression;
use super::{
    rmse, Augmentation, CovariatePanel, GeodesicEffect, GscResult, Panel, RepairFlag, WeightSolver,
};
use crate::error::{GscError, Result};
use crate::simplex::{
    build_unit_weight_qp, solve_simplex_derivative_free, solve_simplex_qp, SimplexSolution,
    SimplexWeights, SolverConfig,
};
use crate::spaces::{distance, isometric_coordinates, transport, weighted_frechet_mean, ObjectPoint};

/// One fitting block: a target and the donor points whose weighted mean
/// should match it.
pub(crate) type Block<'a> = (&'a ObjectPoint, Vec<&'a ObjectPoint>);

/// Minimizes `(1/R) Σ_r Σ_k d²(target_rk, mean_w(donors_rk))` over the
/// simplex, where `rows[r]` lists the blocks of row `r`. Uses the exact QP
/// when every block lives in a flat space.
pub(crate) fn fit_weights(rows: &[Vec<Block<'_>>], cfg: &SolverConfig) -> Result<(SimplexSolution, WeightSolver)> {
    let n = rows
        .first()
        .and_then(|r| r.first())
        .map(|(_, d)| d.len())
        .ok_or_else(|| GscError::InvalidArgument("no data to fit weights on".into()))?;
    let flat = rows.iter().flatten().all(|(t, _)| t.space().is_flat());
    if flat {
        let mut periods = Vec::with_capacity(rows.len());
        for row in rows {
            let mut y = Vec::new();
            let mut cols = vec![Vec::new(); n];
            for (target, donors) in row {
                y.extend(isometric_coordinates(target)?);
                for (c, d) in cols.iter_mut().zip(donors) {
                    c.extend(isometric_coordinates(d)?);
                }
            }
            periods.push((y, cols));
        }
        let qp = build_unit_weight_qp(&periods)?;
        return Ok((solve_simplex_qp(&qp, cfg)?, WeightSolver::Qp));
    }
    let scale = 1.0 / rows.len() as f64;
    let objective = |w: &[f64]| -> Result<f64> {
        let w = SimplexWeights::normalized(w.to_vec());
        let mut total = 0.0;
        for (target, donors) in rows.iter().flatten() {
            let m = weighted_frechet_mean(donors, &w)?;
            total += distance(target, &m)?.powi(2);
        }
        Ok(total * scale)
    };
    Ok((
        solve_simplex_derivative_free(objective, n, cfg)?,
        WeightSolver::DerivativeFree,
    ))
}

pub(crate) fn unit_blocks(panel: &Panel) -> Vec<Vec<Block<'_>>> {
    (0..panel.t0())
        .map(|t| vec![(panel.outcome(0, t), panel.controls_at(t))])
        .collect()
}

fn assemble(
    panel: &Panel,
    solution: SimplexSolution,
    solver: WeightSolver,
) -> Result<GscResult> {
    let weights = solution.weights;
    let synthetic = (0..panel.n_periods())
        .map(|t| weighted_frechet_mean(&panel.controls_at(t), &weights))
        .collect::<Result<Vec<_>>>()?;
    finish(panel, weights, solver, solution.objective, synthetic, Vec::new(), None)
}

fn finish(
    panel: &Panel,
    weights: SimplexWeights,
    solver: WeightSolver,
    objective: f64,
    synthetic: Vec<ObjectPoint>,
    repair_flags: Vec<RepairFlag>,
    augmentation: Option<Augmentation>,
) -> Result<GscResult> {
    let t0 = panel.t0();
    let pre_fit_distances = (0..t0)
        .map(|t| distance(panel.outcome(0, t), &synthetic[t]))
        .collect::<Result<Vec<_>>>()?;
    let effects = (t0..panel.n_periods())
        .map(|t| GeodesicEffect::new(synthetic[t].clone(), panel.outcome(0, t).clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GscResult {
        weights,
        solver,
        objective,
        synthetic,
        effects,
        pre_fit_rmse: rmse(&pre_fit_distances),
        pre_fit_distances,
        repair_flags,
        augmentation,
    })
}

/// Geodesic synthetic control: donor weights from the pre-period fit, the
/// synthetic unit as the weighted Fréchet mean of donors in every period.
pub fn estimate_gsc(panel: &Panel, cfg: &SolverConfig) -> Result<GscResult> {
    let (solution, solver) = fit_weights(&unit_blocks(panel), cfg)?;
    assemble(panel, solution, solver)
}

/// GSC with weights fitted on covariates under the product metric
/// `d_X² = Σ_k d_k²`, then applied to the outcomes.
pub fn estimate_gsc_with_covariates(
    panel: &Panel,
    covariates: &CovariatePanel,
    cfg: &SolverConfig,
) -> Result<GscResult> {
    if covariates.n_units() != panel.n_units() {
        return Err(GscError::InvalidPanel(format!(
            "covariates for {} units, panel has {}",
            covariates.n_units(),
            panel.n_units()
        )));
    }
    let values = covariates.values();
    let rows: Vec<Vec<Block<'_>>> = (0..covariates.n_periods())
        .map(|t| {
            (0..covariates.spaces().len())
                .map(|k| {
                    let donors = values[1..].iter().map(|u| &u[t][k]).collect();
                    (&values[0][t][k], donors)
                })
                .collect()
        })
        .collect();
    let (solution, solver) = fit_weights(&rows, cfg)?;
    assemble(panel, solution, solver)
}

/// Augmented GSC: the GSC synthetic transported along the displacement
/// between the regression prediction for the donor combination and for the
/// treated unit. `covariates[j]` is the Euclidean covariate vector of unit
/// `j`. Requires a flat-chart outcome space.
pub fn estimate_augmented_gsc(
    panel: &Panel,
    covariates: &[Vec<f64>],
    cfg: &SolverConfig,
    allow_pseudo_inverse: bool,
) -> Result<GscResult> {
    if !panel.space().is_flat() {
        return Err(GscError::InvalidArgument(format!(
            "augmented GSC needs a flat-chart space, not {}",
            panel.space().kind()
        )));
    }
    if covariates.len() != panel.n_units() {
        return Err(GscError::Dimension(format!(
            "{} covariate vectors for {} units",
            covariates.len(),
            panel.n_units()
        )));
    }
    let base = estimate_gsc(panel, cfg)?;
    let model = fit_global_frechet_regression(
        panel.space(),
        &panel.outcomes()[1..],
        &covariates[1..],
        allow_pseudo_inverse,
    )?;
    let mut flags = Vec::new();
    let mut note = |context: String, r: crate::spaces::Repaired| {
        if let Some(n) = r.repair {
            flags.push(RepairFlag { context, note: n });
        }
        r.point
    };
    let labels = panel.time_labels();
    let mut treated_prediction = Vec::with_capacity(panel.n_periods());
    let mut donor_prediction = Vec::with_capacity(panel.n_periods());
    let mut synthetic = Vec::with_capacity(panel.n_periods());
    for t in 0..panel.n_periods() {
        let treated = note(
            format!("regression prediction, treated, {}", labels[t]),
            model.predict(&covariates[0], t, cfg.repair)?,
        );
        let mut donors = Vec::with_capacity(panel.n_controls());
        for (j, x) in covariates[1..].iter().enumerate() {
            donors.push(note(
                format!("regression prediction, {}, {}", panel.unit_labels()[j + 1], labels[t]),
                model.predict(x, t, cfg.repair)?,
            ));
        }
        let refs: Vec<&ObjectPoint> = donors.iter().collect();
        let donor_mean = weighted_frechet_mean(&refs, &base.weights)?;
        let corrected = note(
            format!("bias correction, {}", labels[t]),
            transport(&donor_mean, &treated, &base.synthetic[t], cfg.repair)?,
        );
        treated_prediction.push(treated);
        donor_prediction.push(donor_mean);
        synthetic.push(corrected);
    }
    let augmentation = Augmentation {
        treated_prediction,
        donor_prediction,
        uncorrected: base.synthetic,
        pseudo_inverse: model.used_pseudo_inverse(),
    };
    finish(
        panel,
        base.weights,
        base.solver,
        base.objective,
        synthetic,
        flags,
        Some(augmentation),
    )
}
