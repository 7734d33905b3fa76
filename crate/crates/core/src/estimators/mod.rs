//! Synthetic-control style estimators for panels of metric-space objects.
//!
//! Unit 0 of a [`Panel`] is the treated unit and units `1..=J` are the
//! donors. Periods `0..t0` are pre-treatment.

mod gsc;
mod gsdid;
mod placebo;
mod regression;

use std::sync::Arc;

use crate::error::{GscError, Result};
use crate::simplex::SimplexWeights;
use crate::spaces::{distance, validate_point, ObjectPoint, RepairNote, SpaceDescriptor};

pub use gsc::{estimate_augmented_gsc, estimate_gsc, estimate_gsc_with_covariates};
pub use gsdid::{estimate_gdid, estimate_gsdid, estimate_gsdid_per_time, GsdidPerTime};
pub use placebo::{placebo_test, PlaceboMethod, PlaceboReport};
pub use regression::{fit_global_frechet_regression, FrechetRegressionModel};

/// Outcomes indexed `[unit][time]`, unit 0 treated.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    space: Arc<SpaceDescriptor>,
    outcomes: Vec<Vec<ObjectPoint>>,
    t0: usize,
    unit_labels: Vec<String>,
    time_labels: Vec<String>,
}

impl Panel {
    pub fn new(
        space: Arc<SpaceDescriptor>,
        outcomes: Vec<Vec<ObjectPoint>>,
        t0: usize,
        unit_labels: Vec<String>,
        time_labels: Vec<String>,
    ) -> Result<Self> {
        let units = outcomes.len();
        if units < 2 {
            return Err(GscError::InvalidPanel(format!(
                "need a treated unit and at least one control, got {units} units"
            )));
        }
        let periods = outcomes[0].len();
        if t0 < 1 || t0 >= periods {
            return Err(GscError::InvalidPanel(format!(
                "pre-treatment cutoff T0 = {t0} must satisfy 1 <= T0 < T = {periods}"
            )));
        }
        if unit_labels.len() != units || time_labels.len() != periods {
            return Err(GscError::InvalidPanel(format!(
                "{} unit labels and {} time labels for a {units}x{periods} panel",
                unit_labels.len(),
                time_labels.len()
            )));
        }
        for (j, row) in outcomes.iter().enumerate() {
            if row.len() != periods {
                return Err(GscError::InvalidPanel(format!(
                    "unit {j} ({}) has {} periods, expected {periods}",
                    unit_labels[j],
                    row.len()
                )));
            }
            for (t, p) in row.iter().enumerate() {
                if !crate::spaces::same_space(p.space(), &space) {
                    return Err(GscError::InvalidPanel(format!(
                        "unit {j} ({}), time {t} ({}): point is not in the panel space",
                        unit_labels[j], time_labels[t]
                    )));
                }
                validate_point(p).map_err(|v| {
                    GscError::InvalidPanel(format!(
                        "unit {j} ({}), time {t} ({}): {v}",
                        unit_labels[j], time_labels[t]
                    ))
                })?;
            }
        }
        Ok(Self {
            space,
            outcomes,
            t0,
            unit_labels,
            time_labels,
        })
    }

    /// Panel with default labels `unit0..` and `t1..`.
    pub fn unlabeled(
        space: Arc<SpaceDescriptor>,
        outcomes: Vec<Vec<ObjectPoint>>,
        t0: usize,
    ) -> Result<Self> {
        let units = outcomes.len();
        let periods = outcomes.first().map_or(0, Vec::len);
        Self::new(
            space,
            outcomes,
            t0,
            (0..units).map(|j| format!("unit{j}")).collect(),
            (1..=periods).map(|t| format!("t{t}")).collect(),
        )
    }

    pub fn space(&self) -> &Arc<SpaceDescriptor> {
        &self.space
    }

    pub fn outcomes(&self) -> &[Vec<ObjectPoint>] {
        &self.outcomes
    }

    pub fn outcome(&self, unit: usize, time: usize) -> &ObjectPoint {
        &self.outcomes[unit][time]
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    /// Number of control units `J`.
    pub fn n_controls(&self) -> usize {
        self.outcomes.len() - 1
    }

    pub fn n_units(&self) -> usize {
        self.outcomes.len()
    }

    pub fn n_periods(&self) -> usize {
        self.time_labels.len()
    }

    pub fn unit_labels(&self) -> &[String] {
        &self.unit_labels
    }

    pub fn time_labels(&self) -> &[String] {
        &self.time_labels
    }

    pub(crate) fn controls_at(&self, t: usize) -> Vec<&ObjectPoint> {
        self.outcomes[1..].iter().map(|row| &row[t]).collect()
    }

    /// The same panel with `unit` moved to the treated slot; the remaining
    /// units (including the original treated unit) keep their order.
    pub fn with_treated(&self, unit: usize) -> Result<Self> {
        if unit >= self.n_units() {
            return Err(GscError::InvalidArgument(format!(
                "unit {unit} out of range for {} units",
                self.n_units()
            )));
        }
        let order = reorder(self.n_units(), unit);
        Ok(Self {
            space: Arc::clone(&self.space),
            outcomes: order.iter().map(|&j| self.outcomes[j].clone()).collect(),
            t0: self.t0,
            unit_labels: order.iter().map(|&j| self.unit_labels[j].clone()).collect(),
            time_labels: self.time_labels.clone(),
        })
    }
}

pub(crate) fn reorder(n: usize, first: usize) -> Vec<usize> {
    std::iter::once(first).chain((0..n).filter(|&j| j != first)).collect()
}

/// Covariates indexed `[unit][pre-period][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariatePanel {
    spaces: Vec<Arc<SpaceDescriptor>>,
    values: Vec<Vec<Vec<ObjectPoint>>>,
}

impl CovariatePanel {
    pub fn new(spaces: Vec<Arc<SpaceDescriptor>>, values: Vec<Vec<Vec<ObjectPoint>>>) -> Result<Self> {
        if spaces.is_empty() {
            return Err(GscError::InvalidPanel("covariate panel has no components".into()));
        }
        let periods = values.first().map_or(0, Vec::len);
        if periods == 0 {
            return Err(GscError::InvalidPanel("covariate panel has no periods".into()));
        }
        for (j, unit) in values.iter().enumerate() {
            if unit.len() != periods {
                return Err(GscError::InvalidPanel(format!(
                    "covariates of unit {j} cover {} periods, expected {periods}",
                    unit.len()
                )));
            }
            for (t, comps) in unit.iter().enumerate() {
                if comps.len() != spaces.len() {
                    return Err(GscError::InvalidPanel(format!(
                        "unit {j}, time {t}: {} covariate components, expected {}",
                        comps.len(),
                        spaces.len()
                    )));
                }
                for (k, (p, s)) in comps.iter().zip(&spaces).enumerate() {
                    if !crate::spaces::same_space(p.space(), s) {
                        return Err(GscError::InvalidPanel(format!(
                            "unit {j}, time {t}, covariate {k}: wrong space"
                        )));
                    }
                    validate_point(p).map_err(|v| {
                        GscError::InvalidPanel(format!("unit {j}, time {t}, covariate {k}: {v}"))
                    })?;
                }
            }
        }
        Ok(Self { spaces, values })
    }

    pub fn spaces(&self) -> &[Arc<SpaceDescriptor>] {
        &self.spaces
    }

    pub fn values(&self) -> &[Vec<Vec<ObjectPoint>>] {
        &self.values
    }

    pub fn n_units(&self) -> usize {
        self.values.len()
    }

    pub fn n_periods(&self) -> usize {
        self.values[0].len()
    }

    /// Stacked covariate vector per unit: isometric flat coordinates of
    /// every component, period by period. Only for flat components.
    pub fn euclidean_summary(&self) -> Result<Vec<Vec<f64>>> {
        self.values
            .iter()
            .map(|unit| {
                let mut out = Vec::new();
                for comps in unit {
                    for c in comps {
                        out.extend(crate::spaces::isometric_coordinates(c)?);
                    }
                }
                Ok(out)
            })
            .collect()
    }
}

/// Directed geodesic from an estimated counterfactual to the observation.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicEffect {
    pub start: ObjectPoint,
    pub end: ObjectPoint,
    pub length: f64,
}

impl GeodesicEffect {
    pub fn new(start: ObjectPoint, end: ObjectPoint) -> Result<Self> {
        let length = distance(&start, &end)?;
        Ok(Self { start, end, length })
    }
}

/// How unit (or time) weights were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSolver {
    Qp,
    DerivativeFree,
    Fixed,
}

impl WeightSolver {
    pub fn name(self) -> &'static str {
        match self {
            WeightSolver::Qp => "qp",
            WeightSolver::DerivativeFree => "derivative_free",
            WeightSolver::Fixed => "fixed",
        }
    }
}

/// A repair applied while restoring or transporting a point.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairFlag {
    pub context: String,
    pub note: RepairNote,
}

/// Regression-based correction recorded by the augmented estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmentation {
    /// `m̂_t(Z_1)` for every period.
    pub treated_prediction: Vec<ObjectPoint>,
    /// `w̄`-weighted mean of `m̂_t(Z_j)` over controls, every period.
    pub donor_prediction: Vec<ObjectPoint>,
    /// GSC synthetic before the correction.
    pub uncorrected: Vec<ObjectPoint>,
    pub pseudo_inverse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GscResult {
    pub weights: SimplexWeights,
    pub solver: WeightSolver,
    /// Minimized pre-period objective.
    pub objective: f64,
    /// Synthetic outcome for every period (pre-period fitted values first).
    pub synthetic: Vec<ObjectPoint>,
    /// One effect per post period.
    pub effects: Vec<GeodesicEffect>,
    /// `d(Y_{1,t}, synthetic_t)` for `t < t0`.
    pub pre_fit_distances: Vec<f64>,
    pub pre_fit_rmse: f64,
    pub repair_flags: Vec<RepairFlag>,
    pub augmentation: Option<Augmentation>,
}

/// The four weighted means combined by the doubly robust estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct GsdidIntermediates {
    /// `λ̄`-weighted pre-period mean of the treated unit.
    pub treated_pre: ObjectPoint,
    /// `w̄`-weighted mean over donors of their `λ̄`-weighted pre means.
    pub donor_pre: ObjectPoint,
    /// `w̄`-weighted mean over donors of their post-period means.
    pub donor_post: ObjectPoint,
    /// Post-period mean of the treated unit.
    pub treated_post: ObjectPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsdidResult {
    pub unit_weights: SimplexWeights,
    pub time_weights: SimplexWeights,
    pub unit_solver: WeightSolver,
    pub time_solver: WeightSolver,
    pub synthetic: ObjectPoint,
    pub observed_post_mean: ObjectPoint,
    pub effect: GeodesicEffect,
    pub intermediates: GsdidIntermediates,
    /// `d(Y_{1,t}, Y^{(w̄)}_t)` for `t < t0`.
    pub pre_fit_distances: Vec<f64>,
    pub repair_flags: Vec<RepairFlag>,
}

pub(crate) fn rmse(d: &[f64]) -> f64 {
    (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt()
}
