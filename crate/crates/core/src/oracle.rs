//! Particle cross-checks of the kinetic solver: a co-simulation against the
//! grid solution and three closed-form Langevin checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::config::SimConfig;
use crate::error::Result;
use crate::grid::{build_grids, initial_data, CosineSeries, SpatialGrid};
use crate::kinetic::{step_vpfp, KineticState};
use crate::poisson::FieldPair;
use crate::sde::{
    compare_marginals, sample_variance, step_particles, velocity_variance, MarginalReport,
    ParticleEnsemble, MAX_STEP_RATIO,
};

/// `dt / ε²` of the closed-form checks. Euler–Maruyama inflates the
/// stationary velocity variance by `1/(1 - r/2)`, so `r` is kept small
/// enough for that bias to sit well below the sampling error.
pub const CHECK_STEP_RATIO: f64 = 0.005;

/// Initial velocity spread of the relaxation checks.
const SIGMA0: f64 = 2.0;

/// Histogram of particle positions against `marginal(f)` on a shared run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoSimulation {
    pub epsilon: f64,
    pub kinetic_dt: f64,
    pub particle_dt: f64,
    pub report: MarginalReport,
    /// `5·SE + 2Δx·TV(ρ)`.
    pub tolerance: f64,
    pub passed: bool,
}

/// `Var(V_t)` against `1 + (σ0² - 1) e^{-2t/ε²}` with zero field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCheck {
    pub epsilon: f64,
    pub t: f64,
    pub dt: f64,
    pub measured: f64,
    pub expected: f64,
    pub standard_error: f64,
    /// Allowed multiple of the standard error.
    pub k: f64,
    pub passed: bool,
}

/// `Var(X_t - X_0)` against `2t` with stationary velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCheck {
    pub epsilon: f64,
    pub t: f64,
    pub dt: f64,
    pub measured: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub passed: bool,
}

/// Pearson χ² of the velocity histogram against `N(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxwellianCheck {
    pub epsilon: f64,
    pub t: f64,
    pub dt: f64,
    pub bins: usize,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    /// 0.999 quantile of the χ² law.
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub particles: usize,
    pub seed: u64,
    pub co_simulation: CoSimulation,
    pub ou_variance: VarianceCheck,
    pub diffusion: DiffusionCheck,
    pub maxwellian: MaxwellianCheck,
    pub passed: bool,
}

/// Splits `t` into equal steps no larger than `max_dt`.
fn uniform_steps(t: f64, max_dt: f64) -> (usize, f64) {
    if t <= 0.0 {
        return (0, 0.0);
    }
    let n = (t / max_dt).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

fn advance_free(grid: &SpatialGrid, ens: &mut ParticleEnsemble, t: f64, ratio: f64) -> Result<f64> {
    let eps = ens.epsilon;
    let (n, dt) = uniform_steps(t, ratio * eps * eps);
    let zero = FieldPair::zeros(grid.len());
    for _ in 0..n {
        step_particles(grid, ens, &zero, dt)?;
    }
    Ok(dt)
}

/// Runs the kinetic solver and a particle ensemble side by side from the
/// configured initial data, the particles feeling the grid field.
pub fn co_simulate(config: &SimConfig) -> Result<CoSimulation> {
    let eps = config.oracle.epsilon;
    let t_final = config.oracle.t_final;
    let run = config.with_epsilon(eps);
    let grid = build_grids(&run)?;
    let data = initial_data(&run.init, &grid)?;
    let max_dt = run.dt_policy.max_dt(eps, grid.v.dv(), t_final);
    let (steps, dt) = uniform_steps(t_final, max_dt);
    let (substeps, particle_dt) = uniform_steps(dt, MAX_STEP_RATIO * eps * eps);

    let mut state = KineticState::new(&grid, data.f0, &data.rho_i, eps)?;
    let mut ens = ParticleEnsemble::sample_product(
        &run.init.rho0,
        1.0,
        config.oracle.particles,
        eps,
        run.length,
        run.seed,
    );
    for _ in 0..steps {
        for _ in 0..substeps {
            step_particles(&grid.x, &mut ens, &state.field, particle_dt)?;
        }
        state = step_vpfp(&grid, &state, dt, &data.rho_i)?;
    }
    let report = compare_marginals(&grid, &ens, &state.f);
    let tolerance = 5.0 * report.l1_standard_error + 2.0 * report.dx * report.total_variation;
    Ok(CoSimulation {
        epsilon: eps,
        kinetic_dt: dt,
        particle_dt,
        passed: report.histogram_within(5.0),
        report,
        tolerance,
    })
}

/// Relaxation of `Var(V)` from `σ0 = 2` over one collision time `ε²`.
pub fn ou_variance_check(
    grid: &SpatialGrid,
    particles: usize,
    epsilon: f64,
    seed: u64,
) -> Result<VarianceCheck> {
    let t = epsilon * epsilon;
    let mut ens = ParticleEnsemble::sample_product(
        &CosineSeries::constant(1.0),
        SIGMA0,
        particles,
        epsilon,
        grid.length(),
        seed,
    );
    let dt = advance_free(grid, &mut ens, t, CHECK_STEP_RATIO)?;
    let (measured, standard_error) = velocity_variance(&ens);
    let expected = 1.0 + (SIGMA0 * SIGMA0 - 1.0) * (-2.0 * t / (epsilon * epsilon)).exp();
    let k = 3.0;
    Ok(VarianceCheck {
        epsilon,
        t,
        dt,
        measured,
        expected,
        standard_error,
        k,
        passed: (measured - expected).abs() <= k * standard_error,
    })
}

/// Position variance of free particles with unit-variance velocities.
pub fn diffusion_check(
    grid: &SpatialGrid,
    particles: usize,
    epsilon: f64,
    t: f64,
    seed: u64,
) -> Result<DiffusionCheck> {
    // A long periodic box keeps the displacements unambiguous.
    let length = 1.0e4;
    let mut ens = ParticleEnsemble::sample_product(
        &CosineSeries::constant(1.0),
        1.0,
        particles,
        epsilon,
        length,
        seed,
    );
    let start: Vec<f64> = ens.positions().collect();
    let dt = advance_free(grid, &mut ens, t, MAX_STEP_RATIO)?;
    let displacement: Vec<f64> = ens
        .positions()
        .zip(&start)
        .map(|(x, x0)| {
            let d = x - x0;
            d - length * (d / length).round()
        })
        .collect();
    let (measured, _) = sample_variance(displacement.iter().copied());
    let expected = 2.0 * t;
    let relative_error = (measured - expected).abs() / expected;
    Ok(DiffusionCheck {
        epsilon,
        t,
        dt,
        measured,
        expected,
        relative_error,
        passed: relative_error <= 0.05,
    })
}

/// Velocity histogram after `t = 5ε²`: 40 bins on `[-4, 4]` plus two tails.
pub fn maxwellian_check(
    grid: &SpatialGrid,
    particles: usize,
    epsilon: f64,
    seed: u64,
) -> Result<MaxwellianCheck> {
    let t = 5.0 * epsilon * epsilon;
    let mut ens = ParticleEnsemble::sample_product(
        &CosineSeries::constant(1.0),
        SIGMA0,
        particles,
        epsilon,
        grid.length(),
        seed,
    );
    let dt = advance_free(grid, &mut ens, t, CHECK_STEP_RATIO)?;

    let inner = 40;
    let (lo, hi) = (-4.0, 4.0);
    let width = (hi - lo) / inner as f64;
    let mut counts = vec![0usize; inner + 2];
    for v in ens.velocities() {
        let bin = if v < lo {
            0
        } else if v >= hi {
            inner + 1
        } else {
            1 + (((v - lo) / width) as usize).min(inner - 1)
        };
        counts[bin] += 1;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let edge = |i: usize| lo + i as f64 * width;
    let probability = |bin: usize| match bin {
        0 => normal.cdf(lo),
        b if b == inner + 1 => 1.0 - normal.cdf(hi),
        b => normal.cdf(edge(b)) - normal.cdf(edge(b - 1)),
    };
    let n = ens.len() as f64;
    let statistic: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let expected = n * probability(b);
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    let dof = counts.len() - 1;
    let bound = ChiSquared::new(dof as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.999);
    Ok(MaxwellianCheck {
        epsilon,
        t,
        dt,
        bins: counts.len(),
        statistic,
        degrees_of_freedom: dof,
        bound,
        passed: statistic <= bound,
    })
}

/// Full oracle report for `config`.
pub fn run_oracle(config: &SimConfig) -> Result<OracleReport> {
    let config = config.clone().resolved();
    config.validate()?;
    let grid = build_grids(&config)?;
    let n = config.oracle.particles;
    let seed = config.seed;
    let co_simulation = co_simulate(&config)?;
    let ou_variance = ou_variance_check(&grid.x, n, 0.1, seed.wrapping_add(1))?;
    let diffusion = diffusion_check(&grid.x, n, 0.1, 0.5, seed.wrapping_add(2))?;
    let maxwellian = maxwellian_check(&grid.x, n, 0.1, seed.wrapping_add(3))?;
    let passed =
        co_simulation.passed && ou_variance.passed && diffusion.passed && maxwellian.passed;
    Ok(OracleReport {
        particles: n,
        seed,
        co_simulation,
        ou_variance,
        diffusion,
        maxwellian,
        passed,
    })
}
