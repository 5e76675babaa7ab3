//! Strang-split solver for the kinetic equation
//!
//! ```text
//! ∂_t f + (1/ε) v ∂_x f + (1/ε) E ∂_v f = (1/ε²) ∂_v (v f + ∂_v f),
//! -∂_xx φ = ρ - ρ_i,   E = -∂_x φ,   ρ = ∫ f dv.
//! ```
//!
//! One step is `C(dt/2) A(dt/2) T(dt) A(dt/2) C(dt/2)` with an implicit
//! collision `C`, a limited upwind velocity advection `A` and an exact
//! spectral free streaming `T`.

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::diagnostics::{DiagnosticsContext, DiagnosticsRecord, DiagnosticsSink};
use crate::error::{Error, Result};
use crate::fluid::{run_ddp, FluidTrajectory};
use crate::grid::{build_grids, initial_data, PhaseField, PhaseGrid, SpatialField};
use crate::poisson::{field_from_density, FieldPair};

/// Kinetic solution at one time level.
#[derive(Debug, Clone)]
pub struct KineticState {
    pub t: f64,
    pub f: PhaseField,
    /// Self-consistent field of `f` at time `t`.
    pub field: FieldPair,
    pub epsilon: f64,
    /// Mass that has left through `|v| = Vmax` so far.
    pub outflow: f64,
}

impl KineticState {
    pub fn new(
        grid: &PhaseGrid,
        f: PhaseField,
        rho_i: &SpatialField,
        epsilon: f64,
    ) -> Result<Self> {
        let field = field_from_density(&grid.x, &crate::diagnostics::marginal(grid, &f), rho_i)?;
        Ok(Self {
            t: 0.0,
            f,
            field,
            epsilon,
            outflow: 0.0,
        })
    }
}

/// Factorised tridiagonal system of one backward-Euler collision step.
///
/// The unknown is `g = f / M_h`; the face fluxes are
/// `F_{k+1/2} = M_{k+1/2} (g_{k+1} - g_k) / Δv` with `M_{k+1/2}` the geometric
/// mean of the neighbouring Maxwellian values, so `g = const` has zero flux.
struct CollisionSolver {
    lower: Vec<f64>,
    /// Modified super-diagonal of the Thomas sweep.
    upper: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl CollisionSolver {
    fn new(grid: &PhaseGrid, tau: f64) -> Self {
        let v = &grid.v;
        let n = v.len();
        let w = v.weights();
        let m = v.maxwellian();
        let conductance: Vec<f64> = v.face_maxwellian().iter().map(|mf| mf / v.dv()).collect();

        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper_raw = vec![0.0; n];
        for k in 0..n {
            diag[k] = w[k] * m[k];
            if k + 1 < n {
                diag[k] += tau * conductance[k];
                upper_raw[k] = -tau * conductance[k];
            }
            if k > 0 {
                diag[k] += tau * conductance[k - 1];
                lower[k] = -tau * conductance[k - 1];
            }
        }
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for k in 0..n {
            let pivot = diag[k] - lower[k] * prev_upper;
            inv_pivot[k] = 1.0 / pivot;
            upper[k] = upper_raw[k] * inv_pivot[k];
            prev_upper = upper[k];
        }
        Self {
            lower,
            upper,
            inv_pivot,
        }
    }

    fn solve_slice(&self, grid: &PhaseGrid, slice: &mut [f64]) {
        let w = grid.v.weights();
        let m = grid.v.maxwellian();
        let n = slice.len();
        let mut g = vec![0.0; n];
        let mut prev = 0.0;
        for k in 0..n {
            g[k] = (w[k] * slice[k] - self.lower[k] * prev) * self.inv_pivot[k];
            prev = g[k];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            g[k] -= self.upper[k] * g[k + 1];
        }
        for k in 0..n {
            slice[k] = m[k] * g[k];
        }
    }
}

/// Backward-Euler step of `∂_t f = ε^{-2} ∂_v (v f + ∂_v f)` on every x-slice.
///
/// Conservative, positivity preserving, and `ρ ⊗ M_h` is a fixed point.
pub fn fokker_planck_step(
    grid: &PhaseGrid,
    f: &PhaseField,
    dt: f64,
    epsilon: f64,
) -> Result<PhaseField> {
    if !(dt > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "collision step needs dt > 0 and ε > 0, got dt = {dt}, ε = {epsilon}"
        )));
    }
    let solver = CollisionSolver::new(grid, dt / (epsilon * epsilon));
    let mut out = f.clone();
    out.values_mut()
        .par_chunks_mut(grid.nv())
        .for_each(|slice| solver.solve_slice(grid, slice));
    if !out.is_finite() {
        return Err(Error::NonFinite("collision step"));
    }
    Ok(out)
}

/// Exact free streaming `f(x, v) ← f(x - v dt/ε, v)` by Fourier phase shifts.
///
/// `dt` may be negative (backward streaming).
pub fn transport_step(grid: &PhaseGrid, f: &PhaseField, dt: f64, epsilon: f64) -> PhaseField {
    let spectral = grid.x.spectral();
    let length = grid.x.length();
    let columns: Vec<Vec<f64>> = grid
        .v
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(k, &v)| {
            let x0 = (-v * dt / epsilon).rem_euclid(length);
            let mut spec = spectral.forward(&f.v_slice(k));
            for (i, c) in spec.iter_mut().enumerate() {
                *c *= spectral.shift_multiplier(i, x0);
            }
            spectral.inverse_real(spec)
        })
        .collect();
    let mut out = f.clone();
    for (k, column) in columns.iter().enumerate() {
        out.set_v_slice(k, column);
    }
    out
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Advects one velocity profile with speed `a` for `dt`; returns the mass
/// (in `Σ w f` units) that left the domain.
fn advect_slice(slice: &mut [f64], weights: &[f64], a: f64, dt: f64, dv: f64) -> f64 {
    let n = slice.len();
    if a == 0.0 {
        return 0.0;
    }
    let nu = (a * dt / dv).abs();
    let at = |k: isize| -> f64 {
        if k < 0 || k >= n as isize {
            0.0
        } else {
            slice[k as usize]
        }
    };
    // flux[k] is the flux through the face between cells k-1 and k, k = 0..=n.
    let mut flux = vec![0.0; n + 1];
    for (face, value) in flux.iter_mut().enumerate() {
        let left = face as isize - 1;
        let right = face as isize;
        *value = if a > 0.0 {
            if left < 0 {
                0.0
            } else {
                let upwind = at(left);
                let slope = minmod(upwind - at(left - 1), at(right) - upwind);
                a * (upwind + 0.5 * (1.0 - nu) * slope)
            }
        } else if right >= n as isize {
            0.0
        } else {
            let upwind = at(right);
            let slope = minmod(upwind - at(left), at(right + 1) - upwind);
            a * (upwind - 0.5 * (1.0 - nu) * slope)
        };
    }
    for k in 0..n {
        slice[k] -= dt * (flux[k + 1] - flux[k]) / weights[k];
    }
    dt * (flux[n] - flux[0])
}

/// Conservative limited upwind step of `∂_t f + (E/ε) ∂_v f = 0`.
///
/// Returns the advanced density and the mass that crossed `|v| = Vmax`.
pub fn acceleration_step(
    grid: &PhaseGrid,
    f: &PhaseField,
    field: &FieldPair,
    dt: f64,
    epsilon: f64,
) -> Result<(PhaseField, f64)> {
    let sup_e = field.sup_field();
    let courant = dt * sup_e / (epsilon * grid.v.dv());
    if !courant.is_finite() {
        return Err(Error::NonFinite("acceleration step"));
    }
    if courant > 1.0 {
        return Err(Error::Cfl {
            step: "acceleration",
            courant,
            limit: 1.0,
        });
    }
    let weights = grid.v.weights();
    let dv = grid.v.dv();
    let mut out = f.clone();
    let outflow: Vec<f64> = out
        .values_mut()
        .par_chunks_mut(grid.nv())
        .zip(field.field.values().par_iter())
        .map(|(slice, &e)| advect_slice(slice, weights, e / epsilon, dt, dv))
        .collect();
    let lost = outflow.iter().sum::<f64>() * grid.x.dx();
    Ok((out, lost))
}

/// One Strang step; the field is recomputed after the collision half-step and
/// after free streaming.
pub fn step_vpfp(
    grid: &PhaseGrid,
    state: &KineticState,
    dt: f64,
    rho_i: &SpatialField,
) -> Result<KineticState> {
    let eps = state.epsilon;
    let half = 0.5 * dt;
    let f = fokker_planck_step(grid, &state.f, half, eps)?;
    let field = field_from_density(&grid.x, &crate::diagnostics::marginal(grid, &f), rho_i)?;
    let (f, out1) = acceleration_step(grid, &f, &field, half, eps)?;
    let f = transport_step(grid, &f, dt, eps);
    let field = field_from_density(&grid.x, &crate::diagnostics::marginal(grid, &f), rho_i)?;
    let (f, out2) = acceleration_step(grid, &f, &field, half, eps)?;
    let f = fokker_planck_step(grid, &f, half, eps)?;
    let field = field_from_density(&grid.x, &crate::diagnostics::marginal(grid, &f), rho_i)?;
    Ok(KineticState {
        t: state.t + dt,
        f,
        field,
        epsilon: eps,
        outflow: state.outflow + out1 + out2,
    })
}

/// Number of kinetic steps per diagnostic interval under the config's policy.
pub fn steps_per_interval(config: &SimConfig, grid: &PhaseGrid) -> usize {
    let intervals = config.schedule_intervals();
    if intervals == 0 {
        return 0;
    }
    let interval = config.t_final / intervals as f64;
    let max_dt = config
        .dt_policy
        .max_dt(config.epsilon, grid.v.dv(), config.t_final);
    (interval / max_dt).ceil().max(1.0) as usize
}

/// Fixed kinetic step; an integer fraction of the diagnostic interval.
pub fn kinetic_dt(config: &SimConfig, grid: &PhaseGrid) -> f64 {
    let intervals = config.schedule_intervals();
    if intervals == 0 {
        return 0.0;
    }
    config.t_final / (intervals * steps_per_interval(config, grid)) as f64
}

/// Integrates the kinetic problem against a precomputed limit trajectory.
pub fn run_vpfp_with_reference(
    config: &SimConfig,
    reference: &FluidTrajectory,
    sink: &mut dyn DiagnosticsSink,
) -> Result<KineticState> {
    let config = config.clone().resolved();
    let grid = build_grids(&config)?;
    let data = initial_data(&config.init, &grid)?;
    let schedule = config.schedule();
    if schedule.len() != reference.times.len()
        || schedule
            .iter()
            .zip(&reference.times)
            .any(|(a, b)| (a - b).abs() > 1e-12)
    {
        return Err(Error::ScheduleMismatch(
            "fluid reference does not match the diagnostic schedule".into(),
        ));
    }
    let mut ctx = DiagnosticsContext::new(&grid, &config, data.rho_i.clone());
    let mut state = KineticState::new(&grid, data.f0, &data.rho_i, config.epsilon)?;
    let result = (|| {
        let record = ctx.record(&state, &reference.rho[0])?;
        sink.record(&record)?;
        let substeps = steps_per_interval(&config, &grid);
        let dt = kinetic_dt(&config, &grid);
        for (n, &t_target) in schedule.iter().enumerate().skip(1) {
            for _ in 0..substeps {
                state = step_vpfp(&grid, &state, dt, &data.rho_i)?;
            }
            // Remove accumulated roundoff in the clock.
            state.t = t_target;
            let record: DiagnosticsRecord = ctx.record(&state, &reference.rho[n])?;
            sink.record(&record)?;
        }
        Ok(())
    })();
    sink.flush()?;
    result.map(|_| state)
}

/// Runs the kinetic problem and its limit on the shared schedule.
pub fn run_vpfp(config: &SimConfig, sink: &mut dyn DiagnosticsSink) -> Result<KineticState> {
    let reference = run_ddp(config)?;
    run_vpfp_with_reference(config, &reference, sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::marginal;
    use crate::grid::{CosineSeries, InitSpec};
    use std::f64::consts::PI;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1.0, 64, 8.0, 128).unwrap()
    }

    fn rel_sup(a: &PhaseField, b: &PhaseField) -> f64 {
        a.sub(b).sup_norm() / b.sup_norm()
    }

    #[test]
    fn collision_fixes_local_equilibrium() {
        let g = grid();
        let rho = g.x.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let f = PhaseField::product(&g, &rho);
        for dt in [1e-4, 1e-2, 1.0] {
            let out = fokker_planck_step(&g, &f, dt, 0.1).unwrap();
            assert!(
                rel_sup(&out, &f) < 1e-12,
                "dt = {dt}: {}",
                rel_sup(&out, &f)
            );
        }
    }

    #[test]
    fn collision_conserves_mass_and_positivity() {
        let g = grid();
        let f = PhaseField::from_fn(&g, |x, v| {
            (1.0 + 0.3 * (2.0 * PI * x).sin()) * (-(v - 2.0).powi(2)).exp()
        });
        let out = fokker_planck_step(&g, &f, 0.05, 0.1).unwrap();
        assert!((out.mass(&g) - f.mass(&g)).abs() < 1e-13 * f.mass(&g));
        assert!(out.min() >= 0.0);
    }

    #[test]
    fn collision_first_moment_decay() {
        let g = grid();
        let eps = 0.1;
        let first_moment = |f: &PhaseField| -> f64 {
            let w = g.v.weights();
            f.x_slice(0)
                .iter()
                .zip(g.v.nodes())
                .zip(w)
                .map(|((f, v), w)| f * v * w)
                .sum()
        };
        let m = g.v.maxwellian();
        let values = (0..g.nx())
            .flat_map(|_| {
                g.v.nodes()
                    .iter()
                    .zip(m)
                    .map(|(v, mk)| (1.0 + 0.1 * v) * mk)
            })
            .collect();
        let f = PhaseField::from_values(&g, values).unwrap();
        for ratio in [0.01, 0.05, 0.1] {
            let dt = ratio * eps * eps;
            let out = fokker_planck_step(&g, &f, dt, eps).unwrap();
            let decay = first_moment(&out) / first_moment(&f);
            assert!(
                (decay - (-ratio).exp()).abs() <= ratio * ratio,
                "ratio {ratio}: decay {decay}"
            );
        }
    }

    #[test]
    fn transport_of_homogeneous_data_is_identity() {
        let g = grid();
        let f = PhaseField::product(&g, &SpatialField::constant(g.nx(), 1.0));
        let out = transport_step(&g, &f, 0.37, 0.1);
        assert!(rel_sup(&out, &f) < 1e-14);
    }

    #[test]
    fn transport_matches_free_streaming() {
        let g = grid();
        let (dt, eps) = (0.013, 0.1);
        let f = PhaseField::from_fn(&g, |x, v| (2.0 * PI * x).cos() * (-v * v / 4.0).exp());
        let out = transport_step(&g, &f, dt, eps);
        let exact = PhaseField::from_fn(&g, |x, v| {
            (2.0 * PI * (x - v * dt / eps)).cos() * (-v * v / 4.0).exp()
        });
        assert!(out.sub(&exact).sup_norm() < 1e-12);
        let mass = PhaseField::from_fn(&g, |x, v| {
            (1.0 + 0.5 * (2.0 * PI * x).cos()) * (-v * v / 2.0).exp()
        });
        let moved = transport_step(&g, &mass, dt, eps);
        assert!((moved.mass(&g) - mass.mass(&g)).abs() < 1e-13 * mass.mass(&g));
    }

    #[test]
    fn transport_is_reversible() {
        let g = grid();
        let f = PhaseField::from_fn(&g, |x, v| {
            (1.0 + 0.3 * (2.0 * PI * x).cos() + 0.1 * (6.0 * PI * x).sin()) * (-v * v / 2.0).exp()
        });
        let there = transport_step(&g, &f, 0.021, 0.05);
        let back = transport_step(&g, &there, -0.021, 0.05);
        assert!(rel_sup(&back, &f) < 1e-12);
    }

    #[test]
    fn zero_field_acceleration_is_identity() {
        let g = grid();
        let f = PhaseField::product(&g, &SpatialField::constant(g.nx(), 1.0));
        let (out, lost) = acceleration_step(&g, &f, &FieldPair::zeros(g.nx()), 0.01, 0.1).unwrap();
        assert_eq!(out, f);
        assert_eq!(lost, 0.0);
    }

    #[test]
    fn uniform_field_shifts_mean_velocity() {
        let g = PhaseGrid::new(1.0, 8, 8.0, 256).unwrap();
        let eps = 0.5;
        let e = 0.8;
        let field = FieldPair {
            potential: SpatialField::zeros(8),
            field: SpatialField::constant(8, e),
        };
        let f = PhaseField::product(&g, &SpatialField::constant(8, 1.0));
        let dt = 0.5 * eps * g.v.dv() / e;
        let steps = 40;
        let mut cur = f.clone();
        let mut lost = 0.0;
        for _ in 0..steps {
            let (next, out) = acceleration_step(&g, &cur, &field, dt, eps).unwrap();
            cur = next;
            lost += out;
        }
        let mean_v: f64 = cur
            .x_slice(0)
            .iter()
            .zip(g.v.nodes())
            .zip(g.v.weights())
            .map(|((f, v), w)| f * v * w)
            .sum::<f64>()
            / cur
                .x_slice(0)
                .iter()
                .zip(g.v.weights())
                .map(|(f, w)| f * w)
                .sum::<f64>();
        let expected = e * dt * steps as f64 / eps;
        assert!(
            (mean_v - expected).abs() < g.v.dv(),
            "{mean_v} vs {expected}"
        );
        assert!((cur.mass(&g) + lost - f.mass(&g)).abs() < 1e-12);
        assert!(cur.min() >= -1e-13 * cur.max());
    }

    #[test]
    fn acceleration_rejects_cfl_violation() {
        let g = grid();
        let field = FieldPair {
            potential: SpatialField::zeros(g.nx()),
            field: SpatialField::constant(g.nx(), 1.0),
        };
        let f = PhaseField::zeros(&g);
        let dt = 2.0 * 0.1 * g.v.dv();
        assert!(matches!(
            acceleration_step(&g, &f, &field, dt, 0.1),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn global_equilibrium_is_stationary() {
        let g = grid();
        let rho_i = SpatialField::constant(g.nx(), 1.0);
        let f0 = PhaseField::product(&g, &rho_i);
        let mut state = KineticState::new(&g, f0.clone(), &rho_i, 0.1).unwrap();
        for _ in 0..100 {
            state = step_vpfp(&g, &state, 1e-3, &rho_i).unwrap();
        }
        assert!(state.f.sub(&f0).sup_norm() <= 1e-12);
    }

    #[test]
    fn strang_step_conserves_mass() {
        let g = grid();
        let spec = InitSpec {
            rho0: CosineSeries {
                mean: 1.0,
                cos: vec![0.5],
            },
            rho_i: CosineSeries::constant(1.0),
        };
        let data = initial_data(&spec, &g).unwrap();
        let m0 = data.f0.mass(&g);
        let mut state = KineticState::new(&g, data.f0, &data.rho_i, 0.2).unwrap();
        for _ in 0..1000 {
            state = step_vpfp(&g, &state, 2e-4, &data.rho_i).unwrap();
        }
        assert!((state.f.mass(&g) - m0).abs() < 1e-10 * m0);
        assert!(state.f.min() >= -1e-13 * state.f.max());
        let rho = marginal(&g, &state.f);
        let expected = field_from_density(&g.x, &rho, &data.rho_i).unwrap();
        assert_eq!(state.field, expected);
    }
}
