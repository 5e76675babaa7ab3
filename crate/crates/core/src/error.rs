use thiserror::Error;

/// Errors raised by grid construction, solvers, diagnostics and configuration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    /// The Poisson source does not integrate to zero on the torus.
    #[error("charge has nonzero mean {mean:e} (compatibility violated)")]
    NonNeutralCharge { mean: f64 },

    #[error("CFL violation in {step}: Courant number {courant:.4} exceeds {limit}")]
    Cfl {
        step: &'static str,
        courant: f64,
        limit: f64,
    },

    #[error("time step {dt:e} exceeds the bound {bound:e} required by {what}")]
    TimeStep {
        what: &'static str,
        dt: f64,
        bound: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trajectory schedules differ: {0}")]
    ScheduleMismatch(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("failed to parse config: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidInitialData(_) => "invalid_initial_data",
            Error::NonNeutralCharge { .. } => "non_neutral_charge",
            Error::Cfl { .. } => "cfl",
            Error::TimeStep { .. } => "time_step",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::ScheduleMismatch(_) => "schedule_mismatch",
            Error::Config { .. } => "config",
            Error::ConfigParse(_) => "config_parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
