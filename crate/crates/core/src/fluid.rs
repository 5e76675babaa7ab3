//! Drift-diffusion–Poisson limit `∂_t ρ + ∂_x(E ρ) - ∂_xx ρ = 0`,
//! `-∂_xx φ = ρ - ρ_i`, `E = -∂_x φ`, integrated pseudo-spectrally.

use rustfft::num_complex::Complex64;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::grid::{build_grids, initial_data, SpatialField, SpatialGrid};
use crate::poisson::{field_from_density, FieldPair};

/// Drift Courant limit `dt · sup|E| / Δx`.
pub const DRIFT_CFL: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct FluidState {
    pub t: f64,
    pub rho: SpatialField,
    pub field: FieldPair,
}

impl FluidState {
    pub fn new(grid: &SpatialGrid, rho: SpatialField, rho_i: &SpatialField) -> Result<Self> {
        let field = field_from_density(grid, &rho, rho_i)?;
        Ok(Self { t: 0.0, rho, field })
    }
}

/// Spectrum of `-∂_x(E ρ)` for the density with spectrum `rho_hat`.
fn drift(
    grid: &SpatialGrid,
    rho_hat: &[Complex64],
    rho_i: &SpatialField,
) -> Result<Vec<Complex64>> {
    let spectral = grid.spectral();
    let rho = SpatialField::new(spectral.inverse_real(rho_hat.to_vec()));
    let field = field_from_density(grid, &rho, rho_i)?;
    let flux: Vec<f64> = field
        .field
        .values()
        .iter()
        .zip(rho.values())
        .map(|(e, r)| e * r)
        .collect();
    let mut out = spectral.forward(&flux);
    for (i, c) in out.iter_mut().enumerate() {
        *c *= -spectral.derivative_multiplier(i);
    }
    Ok(out)
}

/// One integrating-factor Runge–Kutta step: diffusion is exact in Fourier
/// space, the drift is explicit.
pub fn step_ddp(
    grid: &SpatialGrid,
    state: &FluidState,
    dt: f64,
    rho_i: &SpatialField,
) -> Result<FluidState> {
    let courant = dt * state.field.sup_field() / grid.dx();
    if courant > DRIFT_CFL {
        return Err(Error::Cfl {
            step: "fluid drift",
            courant,
            limit: DRIFT_CFL,
        });
    }
    let spectral = grid.spectral();
    let n = grid.len();
    let half: Vec<f64> = (0..n)
        .map(|i| {
            let k = spectral.wavenumber(i);
            (-k * k * 0.5 * dt).exp()
        })
        .collect();
    let full: Vec<f64> = half.iter().map(|h| h * h).collect();

    let u0 = spectral.forward(state.rho.values());
    let a = drift(grid, &u0, rho_i)?;
    let u1: Vec<Complex64> = (0..n)
        .map(|i| (u0[i] + a[i] * (0.5 * dt)) * half[i])
        .collect();
    let b = drift(grid, &u1, rho_i)?;
    let u2: Vec<Complex64> = (0..n)
        .map(|i| u0[i] * half[i] + b[i] * (0.5 * dt))
        .collect();
    let c = drift(grid, &u2, rho_i)?;
    let u3: Vec<Complex64> = (0..n)
        .map(|i| u0[i] * full[i] + c[i] * (dt * half[i]))
        .collect();
    let d = drift(grid, &u3, rho_i)?;
    let next: Vec<Complex64> = (0..n)
        .map(|i| {
            u0[i] * full[i] + (a[i] * full[i] + (b[i] + c[i]) * (2.0 * half[i]) + d[i]) * (dt / 6.0)
        })
        .collect();
    let rho = SpatialField::new(spectral.inverse_real(next));
    if !rho.is_finite() {
        return Err(Error::NonFinite("fluid step"));
    }
    let field = field_from_density(grid, &rho, rho_i)?;
    Ok(FluidState {
        t: state.t + dt,
        rho,
        field,
    })
}

/// Limit densities on the diagnostic schedule.
#[derive(Debug, Clone)]
pub struct FluidTrajectory {
    pub times: Vec<f64>,
    pub rho: Vec<SpatialField>,
}

/// Integrates the limit problem, sampling `ρ` at every diagnostic time.
pub fn run_ddp(config: &SimConfig) -> Result<FluidTrajectory> {
    let config = config.clone().resolved();
    config.validate()?;
    let grid = build_grids(&config)?;
    let data = initial_data(&config.init, &grid)?;
    let schedule = config.schedule();
    let mut state = FluidState::new(&grid.x, data.rho0, &data.rho_i)?;
    let mut rho = Vec::with_capacity(schedule.len());
    rho.push(state.rho.clone());
    for window in schedule.windows(2) {
        let interval = window[1] - window[0];
        // Twice the drift CFL requirement at the start of the interval.
        let cfl_steps =
            (2.0 * interval * state.field.sup_field() / (DRIFT_CFL * grid.x.dx())).ceil();
        let substeps = config.fluid_substeps.max(cfl_steps as usize);
        let dt = interval / substeps as f64;
        for _ in 0..substeps {
            state = step_ddp(&grid.x, &state, dt, &data.rho_i)?;
        }
        state.t = window[1];
        rho.push(state.rho.clone());
    }
    Ok(FluidTrajectory {
        times: schedule,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CosineSeries, InitSpec};
    use std::f64::consts::PI;

    fn mode_one_amplitude(grid: &SpatialGrid, rho: &SpatialField) -> f64 {
        let spec = grid.spectral().forward(rho.values());
        2.0 * spec[1].norm() / grid.len() as f64
    }

    #[test]
    fn uniform_state_is_stationary() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        let rho_i = SpatialField::constant(64, 1.0);
        let mut state = FluidState::new(&g, rho_i.clone(), &rho_i).unwrap();
        for _ in 0..100 {
            state = step_ddp(&g, &state, 1e-3, &rho_i).unwrap();
        }
        assert!(state.rho.sub(&rho_i).sup_norm() < 1e-13);
    }

    #[test]
    fn linearised_decay_rate() {
        let g = SpatialGrid::new(1.0, 128).unwrap();
        let rho_i = SpatialField::constant(128, 1.0);
        let rho = g.sample(|x| 1.0 + 0.01 * (2.0 * PI * x).cos());
        let mut state = FluidState::new(&g, rho, &rho_i).unwrap();
        let steps = 100;
        for _ in 0..steps {
            state = step_ddp(&g, &state, 0.05 / steps as f64, &rho_i).unwrap();
        }
        let expected = 0.01 * (-(1.0 + 4.0 * PI * PI) * 0.05f64).exp();
        assert!((expected - 1.322e-3).abs() < 1e-6);
        let amplitude = mode_one_amplitude(&g, &state.rho);
        assert!(
            (amplitude - expected).abs() < 0.02 * expected,
            "{amplitude}"
        );
    }

    #[test]
    fn mass_is_conserved_over_many_steps() {
        let g = SpatialGrid::new(1.0, 64).unwrap();
        let rho_i = SpatialField::constant(64, 1.0);
        let rho = g.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos() + 0.1 * (4.0 * PI * x).sin());
        let m0 = rho.integral(&g);
        let mut state = FluidState::new(&g, rho, &rho_i).unwrap();
        for _ in 0..10_000 {
            state = step_ddp(&g, &state, 1e-4, &rho_i).unwrap();
        }
        assert!((state.rho.integral(&g) - m0).abs() < 1e-12 * m0);
    }

    #[test]
    fn drift_cfl_is_enforced() {
        let g = SpatialGrid::new(1.0, 128).unwrap();
        let rho_i = SpatialField::constant(128, 1.0);
        let rho = g.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let state = FluidState::new(&g, rho, &rho_i).unwrap();
        assert!(matches!(
            step_ddp(&g, &state, 0.1, &rho_i),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn trajectory_edge_cases() {
        let config = SimConfig {
            t_final: 0.0,
            ..SimConfig::default()
        };
        let traj = run_ddp(&config).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.rho.len(), 1);

        let config = SimConfig {
            t_final: 0.1,
            init: InitSpec {
                rho0: CosineSeries::constant(1.0),
                rho_i: CosineSeries::constant(1.0),
            },
            ..SimConfig::default()
        };
        let traj = run_ddp(&config).unwrap();
        for rho in &traj.rho {
            assert!(rho.values().iter().all(|&r| (r - 1.0).abs() < 1e-14));
        }
    }
}
