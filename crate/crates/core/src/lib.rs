//! Geodesic synthetic control for panels whose outcomes are points of a
//! geodesic metric space: networks as graph Laplacians, SPD matrices,
//! compositions on the sphere, one-dimensional distributions and functions.
//!
//! Estimators ([`estimate_gsc`], [`estimate_augmented_gsc`],
//! [`estimate_gsdid`]) work on a [`Panel`] whose unit 0 is treated. Donor
//! and time weights live on the probability simplex and are fitted by
//! [`solve_simplex_qp`] in flat spaces or [`solve_simplex_derivative_free`]
//! on the sphere.

pub mod error;
pub mod estimators;
pub mod io;
mod linalg;
pub mod simgen;
pub mod simplex;
pub mod spaces;

pub use error::{GscError, Result};
pub use estimators::{
    estimate_augmented_gsc, estimate_gdid, estimate_gsc, estimate_gsc_with_covariates,
    estimate_gsdid, estimate_gsdid_per_time, fit_global_frechet_regression, placebo_test,
    Augmentation, CovariatePanel, FrechetRegressionModel, GeodesicEffect, GscResult,
    GsdidIntermediates, GsdidPerTime, GsdidResult, Panel, PlaceboMethod, PlaceboReport,
    RepairFlag, WeightSolver,
};
pub use simgen::{oracle_counterfactual, simulate, Scenario, SimConfig, SimOutput, SimTruth};
pub use simplex::{
    solve_simplex_derivative_free, solve_simplex_qp, SimplexQp, SimplexSolution, SimplexWeights,
    SolverConfig,
};
pub use spaces::{
    distance, geodesic_eval, transport, validate_point, weighted_frechet_mean, ObjectPoint,
    SpaceDescriptor, SpaceKind,
};
