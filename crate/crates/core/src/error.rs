use thiserror::Error;

/// Errors raised by geometry, solvers, estimators and file I/O.
#[derive(Debug, Error)]
pub enum GscError {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid space descriptor: {0}")]
    InvalidSpace(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("antipodal points: geodesic is not unique")]
    Antipodal,

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("repair budget exceeded: {0}")]
    RepairBudget(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("objective returned a non-finite value at weights {0:?}")]
    NonFiniteObjective(Vec<f64>),

    #[error("singular covariate covariance (pseudo-inverse not permitted)")]
    SingularCovariance,

    #[error("placebo fit failed for unit {unit} ({label}): {source}")]
    Placebo {
        unit: usize,
        label: String,
        #[source]
        source: Box<GscError>,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl GscError {
    /// True for failures of an optimizer or an iterative mean, as opposed to
    /// malformed input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            GscError::NotConverged { .. }
            | GscError::NonFiniteObjective(_)
            | GscError::SingularCovariance
            | GscError::RepairBudget(_)
            | GscError::Antipodal
            | GscError::Degenerate(_) => true,
            GscError::Placebo { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, GscError>;
