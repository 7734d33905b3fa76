use super::gsc::{fit_weights, unit_blocks, Block};
use super::{GeodesicEffect, GsdidIntermediates, GsdidResult, Panel, RepairFlag, WeightSolver};
use crate::error::Result;
use crate::simplex::{SimplexWeights, SolverConfig};
use crate::spaces::{distance, transport, weighted_frechet_mean, ObjectPoint};

fn pre_points(panel: &Panel, unit: usize) -> Vec<&ObjectPoint> {
    panel.outcomes()[unit][..panel.t0()].iter().collect()
}

fn post_mean(panel: &Panel, unit: usize) -> Result<ObjectPoint> {
    let post: Vec<&ObjectPoint> = panel.outcomes()[unit][panel.t0()..].iter().collect();
    weighted_frechet_mean(&post, &SimplexWeights::uniform(post.len()))
}

fn pre_fit(panel: &Panel, w: &SimplexWeights) -> Result<Vec<f64>> {
    (0..panel.t0())
        .map(|t| {
            let m = weighted_frechet_mean(&panel.controls_at(t), w)?;
            distance(panel.outcome(0, t), &m)
        })
        .collect()
}

/// Time weights matching each donor's pre-period combination to `targets[j]`.
fn fit_time_weights(
    panel: &Panel,
    targets: &[&ObjectPoint],
    cfg: &SolverConfig,
) -> Result<(SimplexWeights, WeightSolver)> {
    let rows: Vec<Vec<Block<'_>>> = targets
        .iter()
        .enumerate()
        .map(|(j, target)| vec![(*target, pre_points(panel, j + 1))])
        .collect();
    let (solution, solver) = fit_weights(&rows, cfg)?;
    Ok((solution.weights, solver))
}

#[allow(clippy::too_many_arguments)]
fn combine(
    panel: &Panel,
    w: &SimplexWeights,
    lambda: &SimplexWeights,
    donor_targets: &[&ObjectPoint],
    treated_post: ObjectPoint,
    cfg: &SolverConfig,
    context: &str,
    flags: &mut Vec<RepairFlag>,
) -> Result<(ObjectPoint, GsdidIntermediates)> {
    let lambda_means = (0..panel.n_units())
        .map(|j| weighted_frechet_mean(&pre_points(panel, j), lambda))
        .collect::<Result<Vec<_>>>()?;
    let donor_lambda: Vec<&ObjectPoint> = lambda_means[1..].iter().collect();
    let donor_pre = weighted_frechet_mean(&donor_lambda, w)?;
    let donor_post = weighted_frechet_mean(donor_targets, w)?;
    let treated_pre = lambda_means[0].clone();
    let moved = transport(&donor_pre, &donor_post, &treated_pre, cfg.repair)?;
    if let Some(note) = moved.repair {
        flags.push(RepairFlag {
            context: context.to_string(),
            note,
        });
    }
    Ok((
        moved.point,
        GsdidIntermediates {
            treated_pre,
            donor_pre,
            donor_post,
            treated_post,
        },
    ))
}

fn run(
    panel: &Panel,
    w: SimplexWeights,
    unit_solver: WeightSolver,
    fixed_time: bool,
    cfg: &SolverConfig,
) -> Result<GsdidResult> {
    let means = (1..panel.n_units())
        .map(|j| post_mean(panel, j))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<&ObjectPoint> = means.iter().collect();
    let (lambda, time_solver) = if fixed_time {
        (SimplexWeights::uniform(panel.t0()), WeightSolver::Fixed)
    } else {
        fit_time_weights(panel, &targets, cfg)?
    };
    let treated_post = post_mean(panel, 0)?;
    let mut flags = Vec::new();
    let (synthetic, intermediates) = combine(
        panel,
        &w,
        &lambda,
        &targets,
        treated_post.clone(),
        cfg,
        "post-period transport",
        &mut flags,
    )?;
    Ok(GsdidResult {
        pre_fit_distances: pre_fit(panel, &w)?,
        effect: GeodesicEffect::new(synthetic.clone(), treated_post.clone())?,
        unit_weights: w,
        time_weights: lambda,
        unit_solver,
        time_solver,
        synthetic,
        observed_post_mean: treated_post,
        intermediates,
        repair_flags: flags,
    })
}

/// Geodesic synthetic difference-in-differences on the pooled post period.
pub fn estimate_gsdid(panel: &Panel, cfg: &SolverConfig) -> Result<GsdidResult> {
    let (solution, solver) = fit_weights(&unit_blocks(panel), cfg)?;
    run(panel, solution.weights, solver, false, cfg)
}

/// Geodesic difference-in-differences: uniform donor and pre-period weights.
pub fn estimate_gdid(panel: &Panel, cfg: &SolverConfig) -> Result<GsdidResult> {
    run(
        panel,
        SimplexWeights::uniform(panel.n_controls()),
        WeightSolver::Fixed,
        true,
        cfg,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsdidPerTime {
    pub unit_weights: SimplexWeights,
    pub unit_solver: WeightSolver,
    pub time_solver: WeightSolver,
    /// `λ̄_t` for each post period.
    pub time_weights: Vec<SimplexWeights>,
    pub effects: Vec<GeodesicEffect>,
    pub intermediates: Vec<GsdidIntermediates>,
    pub repair_flags: Vec<RepairFlag>,
}

/// Per-period variant: separate time weights for every post period `t`,
/// fitted to the donors' outcomes at `t`.
pub fn estimate_gsdid_per_time(panel: &Panel, cfg: &SolverConfig) -> Result<GsdidPerTime> {
    let (solution, unit_solver) = fit_weights(&unit_blocks(panel), cfg)?;
    let w = solution.weights;
    let mut out = GsdidPerTime {
        unit_weights: w.clone(),
        unit_solver,
        time_solver: WeightSolver::Fixed,
        time_weights: Vec::new(),
        effects: Vec::new(),
        intermediates: Vec::new(),
        repair_flags: Vec::new(),
    };
    for t in panel.t0()..panel.n_periods() {
        let targets = panel.controls_at(t);
        let (lambda, time_solver) = fit_time_weights(panel, &targets, cfg)?;
        out.time_solver = time_solver;
        let observed = panel.outcome(0, t).clone();
        let context = format!("transport, {}", panel.time_labels()[t]);
        let (synthetic, inter) = combine(
            panel,
            &w,
            &lambda,
            &targets,
            observed.clone(),
            cfg,
            &context,
            &mut out.repair_flags,
        )?;
        out.effects.push(GeodesicEffect::new(synthetic, observed)?);
        out.time_weights.push(lambda);
        out.intermediates.push(inter);
    }
    Ok(out)
}
