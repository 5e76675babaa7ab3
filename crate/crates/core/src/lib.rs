//! Phase-space solver and convergence laboratory for the diffusive limit of
//! the Vlasov–Poisson–Fokker–Planck system on the one-dimensional torus.
//!
//! The kinetic equation is advanced by [`kinetic::step_vpfp`], its
//! drift-diffusion–Poisson limit by [`fluid::step_ddp`]; the
//! [`diagnostics`] module measures the distance between the two, and
//! [`sweep::run_convergence_sweep`] fits the rate in ε.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fluid;
pub mod grid;
pub mod kinetic;
pub mod oracle;
pub mod poisson;
pub mod sde;
mod spectral;
pub mod sweep;

pub use config::{load_config, DtPolicy, OracleConfig, SimConfig};
pub use diagnostics::{DiagnosticsRecord, DiagnosticsSink};
pub use error::{Error, Result};
pub use fluid::{FluidState, FluidTrajectory};
pub use grid::{
    build_grids, initial_data, maxwellian, CosineSeries, InitSpec, PhaseField, PhaseGrid,
    SpatialField, SpatialGrid, VelocityGrid,
};
pub use kinetic::{run_vpfp, KineticState};
pub use oracle::{run_oracle, OracleReport};
pub use poisson::FieldPair;
pub use sde::ParticleEnsemble;
pub use sweep::{run_convergence_sweep, SweepResult};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
