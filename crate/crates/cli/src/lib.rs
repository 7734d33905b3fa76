//! Command-line front end: `gsc <subcommand> ...`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsc_core::io::{
    emit_plot_series, encode_point, load_covariates, load_panel, save_panel, save_result,
    to_canonical_json, PanelFile, ResultFile, SpaceBlock, FORMAT_VERSION,
};
use gsc_core::{
    estimate_augmented_gsc, estimate_gsc, estimate_gsc_with_covariates, estimate_gsdid,
    estimate_gsdid_per_time, placebo_test, simulate, weighted_frechet_mean, CovariatePanel,
    GscError, ObjectPoint, Panel, PlaceboMethod, Scenario, SimConfig, SimplexWeights, SolverConfig,
};
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "gsc", version, about = "Geodesic synthetic control for metric-space panels")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// KKT tolerance of the weight solvers.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Seed for simulation and solver restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Project outputs that leave the space back onto it.
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    repair: Switch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a simulated panel.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        effect_size: f64,
        /// Number of periods.
        #[arg(long = "periods", default_value_t = 20)]
        t: usize,
        /// Number of pre-treatment periods.
        #[arg(long = "t0", default_value_t = 19)]
        t0: usize,
        /// Number of control units.
        #[arg(long = "controls", default_value_t = 20)]
        j: usize,
        /// Also write the covariates to a separate file.
        #[arg(long)]
        covariates_out: Option<PathBuf>,
    },
    /// Geodesic synthetic control.
    Gsc {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Match on these covariates instead of pre-period outcomes.
        #[arg(long)]
        covariates: Option<PathBuf>,
        #[arg(long)]
        placebo: bool,
        /// Write long-format diagnostics for plotting.
        #[arg(long)]
        plot_series: Option<PathBuf>,
    },
    /// Augmented GSC with a global Fréchet regression correction.
    Agsc {
        #[arg(long)]
        panel: PathBuf,
        /// Defaults to the covariates embedded in the panel file.
        #[arg(long)]
        covariates: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plot_series: Option<PathBuf>,
    },
    /// Geodesic synthetic difference-in-differences.
    Gsdid {
        #[arg(long)]
        panel: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Separate time weights for every post period.
        #[arg(long)]
        per_time: bool,
        #[arg(long, conflicts_with = "per_time")]
        placebo: bool,
        #[arg(long)]
        plot_series: Option<PathBuf>,
    },
    /// Check a panel file and print a summary.
    Validate {
        #[arg(long)]
        panel: PathBuf,
    },
    /// Weighted Fréchet mean of the units at every period.
    FrechetMean {
        #[arg(long)]
        panel: PathBuf,
        /// Comma-separated weights or a JSON array file; J values average the
        /// controls, J+1 values all units.
        #[arg(long)]
        weights: String,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Core(GscError),
    Usage(String),
}

impl From<GscError> for Failure {
    fn from(e: GscError) -> Self {
        Failure::Core(e)
    }
}

type CliResult = Result<(), Failure>;

impl GlobalOpts {
    fn solver(&self) -> Result<SolverConfig, GscError> {
        let cfg = SolverConfig {
            tol_kkt: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            repair: self.repair == Switch::On,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let g = &cli.global;
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            effect_size,
            t,
            t0,
            j,
            covariates_out,
        } => {
            let scenario = Scenario::from_name(&scenario).ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Failure::Usage(format!("unknown scenario {scenario:?}; expected one of {}", names.join(", ")))
            })?;
            let cfg = SimConfig {
                t,
                t0,
                j,
                effect_size,
                ..SimConfig::new(scenario, g.seed)
            };
            let sim = simulate(&cfg)?;
            if let Some(path) = covariates_out {
                let c = sim.covariates.as_ref().ok_or_else(|| {
                    Failure::Usage(format!("scenario {scenario} has no covariates"))
                })?;
                gsc_core::io::save_covariates(c, &path)?;
            }
            save_panel(
                &PanelFile {
                    panel: sim.panel,
                    covariates: sim.covariates,
                },
                &out,
            )?;
            log::info!("wrote {scenario} panel to {}", out.display());
        }
        Command::Gsc {
            panel,
            out,
            covariates,
            placebo,
            plot_series,
        } => {
            let cfg = g.solver()?;
            let file = load_panel(&panel)?;
            let result = match covariates {
                Some(path) => estimate_gsc_with_covariates(&file.panel, &load_covariates(&path)?, &cfg)?,
                None => estimate_gsc(&file.panel, &cfg)?,
            };
            let reports = if placebo {
                placebo_test(&file.panel, PlaceboMethod::Gsc, &cfg)?
            } else {
                Vec::new()
            };
            let r = ResultFile::from_gsc("gsc", &result, &file.panel, &cfg, &reports);
            write_outputs(&r, &file.panel, &out, plot_series.as_deref())?;
        }
        Command::Agsc {
            panel,
            covariates,
            out,
            plot_series,
        } => {
            let cfg = g.solver()?;
            let file = load_panel(&panel)?;
            let covs: CovariatePanel = match covariates {
                Some(path) => load_covariates(&path)?,
                None => file.covariates.clone().ok_or_else(|| {
                    Failure::Usage(format!(
                        "{} has no covariates block; pass --covariates",
                        panel.display()
                    ))
                })?,
            };
            let z = covs.euclidean_summary()?;
            let result = estimate_augmented_gsc(&file.panel, &z, &cfg, false)?;
            let r = ResultFile::from_gsc("agsc", &result, &file.panel, &cfg, &[]);
            write_outputs(&r, &file.panel, &out, plot_series.as_deref())?;
        }
        Command::Gsdid {
            panel,
            out,
            per_time,
            placebo,
            plot_series,
        } => {
            let cfg = g.solver()?;
            let file = load_panel(&panel)?;
            let r = if per_time {
                ResultFile::from_gsdid_per_time(&estimate_gsdid_per_time(&file.panel, &cfg)?, &file.panel, &cfg)
            } else {
                let result = estimate_gsdid(&file.panel, &cfg)?;
                let reports = if placebo {
                    placebo_test(&file.panel, PlaceboMethod::Gsdid, &cfg)?
                } else {
                    Vec::new()
                };
                ResultFile::from_gsdid(&result, &file.panel, &cfg, &reports)
            };
            write_outputs(&r, &file.panel, &out, plot_series.as_deref())?;
        }
        Command::Validate { panel } => {
            let file = load_panel(&panel)?;
            let p = &file.panel;
            println!(
                "{}: valid {} panel, {} controls, {} periods (T0 = {}){}",
                panel.display(),
                p.space().kind().name(),
                p.n_controls(),
                p.n_periods(),
                p.t0(),
                if file.covariates.is_some() { ", with covariates" } else { "" }
            );
        }
        Command::FrechetMean { panel, weights, out } => {
            let file = load_panel(&panel)?;
            let text = frechet_means(&file.panel, &parse_weights(&weights)?)?;
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|source| GscError::Io {
                    path: path.display().to_string(),
                    source,
                })?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn write_outputs(r: &ResultFile, panel: &Panel, out: &Path, plot: Option<&Path>) -> CliResult {
    save_result(r, out)?;
    if let Some(path) = plot {
        emit_plot_series(r, panel, path)?;
    }
    Ok(())
}

fn parse_weights(arg: &str) -> Result<Vec<f64>, GscError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|source| GscError::Io {
            path: arg.to_string(),
            source,
        })?;
        return serde_json::from_str(&text).map_err(|e| GscError::Format {
            path: arg.to_string(),
            message: format!("expected a JSON array of numbers: {e}"),
        });
    }
    arg.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                GscError::InvalidWeights(format!("{arg:?} is neither a file nor a comma-separated list"))
            })
        })
        .collect()
}

fn frechet_means(panel: &Panel, w: &[f64]) -> Result<String, GscError> {
    let n = panel.n_units();
    let first = if w.len() == n {
        0
    } else if w.len() + 1 == n {
        1
    } else {
        return Err(GscError::InvalidWeights(format!(
            "got {} weights for {} controls; pass J or J+1 values",
            w.len(),
            n - 1
        )));
    };
    let weights = SimplexWeights::new(w.to_vec())?;
    let means: Vec<Value> = (0..panel.n_periods())
        .map(|t| {
            let pts: Vec<&ObjectPoint> = (first..n).map(|j| panel.outcome(j, t)).collect();
            weighted_frechet_mean(&pts, &weights).map(|m| encode_point(&m))
        })
        .collect::<Result<_, _>>()?;
    let doc = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "space": SpaceBlock::from_space(panel.space()),
        "time_labels": panel.time_labels(),
        "weights": weights.values(),
        "units": &panel.unit_labels()[first..],
        "means": means,
    });
    Ok(to_canonical_json(&doc))
}
