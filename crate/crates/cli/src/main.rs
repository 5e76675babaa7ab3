//! `vpfp`: kinetic runs, ε-sweeps, the limit solver, the particle oracle and
//! sweep plots.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "vpfp",
    version,
    about = "Diffusive-limit lab for Vlasov-Poisson-Fokker-Planck"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON configuration; defaults are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (falls back to `output_dir`, then `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated ε list overriding the configuration.
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Parallel ε runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// One kinetic run at the configured ε.
    Run(Common),
    /// Kinetic runs over the ε list with rate fits.
    Sweep(Common),
    /// The drift-diffusion-Poisson limit alone.
    Fluid(Common),
    /// Particle cross-checks of the kinetic solver.
    Oracle(Common),
    /// Log-log SVG of a sweep.csv.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => commands::run(&c),
        Command::Sweep(c) => commands::sweep(&c),
        Command::Fluid(c) => commands::fluid(&c),
        Command::Oracle(c) => commands::oracle(&c),
        Command::Plot { csv, out } => {
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            plot::emit_plot(&csv, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .downcast_ref::<vpfp_core::Error>()
                .map(|e| e.kind())
                .unwrap_or("error");
            let report = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
