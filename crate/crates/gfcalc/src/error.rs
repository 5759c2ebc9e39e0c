use thiserror::Error;

/// Errors produced by the toolkit.
///
/// Numerical failures (`InversionFailed`, `QuadratureFailed`, `NonIntegrable`,
/// `Simulation`) are kept distinct from caller mistakes (`Domain`, `Grid`,
/// `Unsupported`) so that batch drivers can map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// The kernel failed the admissibility certification that gates the
    /// Sonine construction and all solvers built on it.
    #[error("kernel `{label}` is not admissible: {reason}")]
    NotAdmissible { label: String, reason: String },

    #[error("Laplace inversion failed: {0}")]
    InversionFailed(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailed(String),

    #[error("nonintegrable singularity detected: {0}")]
    NonIntegrable(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// The sampled initial datum does not cover the effective support of the
    /// kernel it is convolved with.
    #[error("mass deficiency {deficit:.3e} exceeds tolerance: initial-data grid too narrow")]
    MassDeficiency { deficit: f64 },

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics themselves, as opposed to invalid
    /// inputs or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InversionFailed(_)
                | Error::QuadratureFailed(_)
                | Error::NonIntegrable(_)
                | Error::Simulation(_)
        )
    }
}
