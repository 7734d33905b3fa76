use rayon::prelude::*;

use super::{estimate_gsc, estimate_gsdid, Panel};
use crate::error::{GscError, Result};
use crate::simplex::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceboMethod {
    Gsc,
    Gsdid,
}

impl PlaceboMethod {
    pub fn name(self) -> &'static str {
        match self {
            PlaceboMethod::Gsc => "gsc",
            PlaceboMethod::Gsdid => "gsdid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceboReport {
    pub method: PlaceboMethod,
    /// Post period the statistic refers to; `None` for the pooled GSDID
    /// statistic.
    pub time_index: Option<usize>,
    /// Statistic per unit in panel order, the treated unit first.
    pub statistics: Vec<f64>,
    /// `#{j : s_j ≥ s_treated}` (ties count against the treated unit).
    pub rank_of_treated: usize,
    /// `rank / (J + 1)`.
    pub p_value: f64,
}

fn statistics_for(panel: &Panel, unit: usize, method: PlaceboMethod, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let p = panel.with_treated(unit)?;
    Ok(match method {
        PlaceboMethod::Gsc => estimate_gsc(&p, cfg)?.effects.iter().map(|e| e.length).collect(),
        PlaceboMethod::Gsdid => vec![estimate_gsdid(&p, cfg)?.effect.length],
    })
}

/// Placebo permutation test: each unit in turn plays the treated unit with
/// all others as donors. GSC yields one report per post period, GSDID a
/// single pooled report. The first failing unit aborts the test.
pub fn placebo_test(panel: &Panel, method: PlaceboMethod, cfg: &SolverConfig) -> Result<Vec<PlaceboReport>> {
    let runs: Vec<Result<Vec<f64>>> = (0..panel.n_units())
        .into_par_iter()
        .map(|j| statistics_for(panel, j, method, cfg))
        .collect();
    let mut per_unit = Vec::with_capacity(runs.len());
    for (j, r) in runs.into_iter().enumerate() {
        per_unit.push(r.map_err(|e| GscError::Placebo {
            unit: j,
            label: panel.unit_labels()[j].clone(),
            source: Box::new(e),
        })?);
    }
    let n_stats = per_unit[0].len();
    let units = panel.n_units();
    Ok((0..n_stats)
        .map(|k| {
            let statistics: Vec<f64> = per_unit.iter().map(|s| s[k]).collect();
            let rank = rank_of_first(&statistics);
            PlaceboReport {
                method,
                time_index: match method {
                    PlaceboMethod::Gsc => Some(panel.t0() + k),
                    PlaceboMethod::Gsdid => None,
                },
                statistics,
                rank_of_treated: rank,
                p_value: rank as f64 / units as f64,
            }
        })
        .collect())
}

pub(crate) fn rank_of_first(stats: &[f64]) -> usize {
    stats.iter().filter(|&&s| s >= stats[0]).count()
}
