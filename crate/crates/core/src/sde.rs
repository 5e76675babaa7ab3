//! Langevin particle oracle for the kinetic equation:
//!
//! ```text
//! dX = V/ε dt,   dV = (E(X)/ε - V/ε²) dt + √2/ε dW,
//! ```
//!
//! integrated with Euler–Maruyama. Every particle owns a ChaCha stream keyed
//! by `(seed, index)`, so results do not depend on thread scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::marginal;
use crate::error::{Error, Result};
use crate::grid::{CosineSeries, PhaseField, PhaseGrid, SpatialGrid};
use crate::poisson::FieldPair;

/// Euler–Maruyama stability bound `dt ≤ 0.1 ε²`.
pub const MAX_STEP_RATIO: f64 = 0.1;

#[derive(Debug, Clone)]
struct Particle {
    x: f64,
    v: f64,
    rng: ChaCha8Rng,
}

fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    particles: Vec<Particle>,
    pub epsilon: f64,
    pub t: f64,
    pub seed: u64,
    length: f64,
}

impl ParticleEnsemble {
    /// Builds an ensemble from explicit initial positions and velocities.
    pub fn from_states(
        states: impl IntoIterator<Item = (f64, f64)>,
        epsilon: f64,
        length: f64,
        seed: u64,
    ) -> Self {
        let particles = states
            .into_iter()
            .enumerate()
            .map(|(i, (x, v))| Particle {
                x: x.rem_euclid(length),
                v,
                // Initial-state draws use even streams, dynamics odd ones.
                rng: particle_rng(seed, 2 * i + 1),
            })
            .collect();
        Self {
            particles,
            epsilon,
            t: 0.0,
            seed,
            length,
        }
    }

    /// Samples `n` particles from `ρ(x) ⊗ N(0, σ_v²)` with `ρ` a positive
    /// cosine series, positions by rejection.
    pub fn sample_product(
        density: &CosineSeries,
        sigma_v: f64,
        n: usize,
        epsilon: f64,
        length: f64,
        seed: u64,
    ) -> Self {
        let bound = density.mean + density.cos.iter().map(|a| a.abs()).sum::<f64>();
        let states: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = particle_rng(seed, 2 * i);
                let x = loop {
                    let x = rng.gen::<f64>() * length;
                    if rng.gen::<f64>() * bound <= density.eval(x, length) {
                        break x;
                    }
                };
                let v: f64 = rng.sample(StandardNormal);
                (x, sigma_v * v)
            })
            .collect();
        Self::from_states(states, epsilon, length, seed)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.particles.iter().map(|p| p.x)
    }

    pub fn velocities(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.particles.iter().map(|p| p.v)
    }
}

/// Periodic linear interpolation of nodal values.
fn interpolate(grid: &SpatialGrid, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let s = x / grid.dx();
    let j = s.floor();
    let frac = s - j;
    let j = (j as i64).rem_euclid(n as i64) as usize;
    values[j] * (1.0 - frac) + values[(j + 1) % n] * frac
}

/// One Euler–Maruyama step in the frozen field `field`.
///
/// Positions are advanced with the old velocity and the field is sampled at
/// the old position.
pub fn step_particles(
    grid: &SpatialGrid,
    ens: &mut ParticleEnsemble,
    field: &FieldPair,
    dt: f64,
) -> Result<()> {
    let eps = ens.epsilon;
    if dt < 0.0 || dt > MAX_STEP_RATIO * eps * eps * (1.0 + 1e-12) {
        return Err(Error::TimeStep {
            what: "Euler-Maruyama (dt <= 0.1 eps^2)",
            dt,
            bound: MAX_STEP_RATIO * eps * eps,
        });
    }
    if dt == 0.0 {
        return Ok(());
    }
    let e = field.field.values();
    let length = ens.length;
    let noise = (2.0 * dt).sqrt() / eps;
    ens.particles.par_iter_mut().for_each(|p| {
        let force = interpolate(grid, e, p.x);
        let xi: f64 = p.rng.sample(StandardNormal);
        let x = p.x + p.v / eps * dt;
        p.v += (force / eps - p.v / (eps * eps)) * dt + noise * xi;
        p.x = x.rem_euclid(length);
    });
    ens.t += dt;
    Ok(())
}

/// Particle/grid comparison with Monte-Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub particles: usize,
    pub t: f64,
    /// `Σ_j |h_j - ρ_j| Δx` between the position histogram density and the
    /// grid marginal.
    pub l1_distance: f64,
    /// Standard error of the histogram density in the same norm.
    pub l1_standard_error: f64,
    /// `Σ_j |ρ_{j+1} - ρ_j|` of the grid marginal.
    pub total_variation: f64,
    pub dx: f64,
    pub mean_velocity_gap: f64,
    pub mean_velocity_standard_error: f64,
    pub second_moment_gap: f64,
    pub second_moment_standard_error: f64,
}

impl MarginalReport {
    /// `l1_distance ≤ k·SE + 2Δx·TV(ρ)`.
    pub fn histogram_within(&self, k: f64) -> bool {
        self.l1_distance <= k * self.l1_standard_error + 2.0 * self.dx * self.total_variation
    }
}

/// Position histogram on bins centred at the grid nodes, as a density.
pub fn position_histogram(grid: &SpatialGrid, ens: &ParticleEnsemble) -> Vec<f64> {
    let n = grid.len();
    let mut counts = vec![0usize; n];
    for x in ens.positions() {
        let j = ((x / grid.dx()) + 0.5).floor() as i64;
        counts[j.rem_euclid(n as i64) as usize] += 1;
    }
    let scale = 1.0 / (ens.len() as f64 * grid.dx());
    counts.into_iter().map(|c| c as f64 * scale).collect()
}

/// Compares the ensemble to a grid density `f` at the same time.
///
/// The grid marginal is normalised to unit mass before comparison, so that
/// the histogram and the marginal are both probability densities.
pub fn compare_marginals(
    grid: &PhaseGrid,
    ens: &ParticleEnsemble,
    f: &PhaseField,
) -> MarginalReport {
    let n = ens.len() as f64;
    let rho = marginal(grid, f);
    let mass = rho.integral(&grid.x);
    let rho = rho.scaled(1.0 / mass);
    let hist = position_histogram(&grid.x, ens);
    let dx = grid.x.dx();
    let l1_distance = hist
        .iter()
        .zip(rho.values())
        .map(|(h, r)| (h - r).abs() * dx)
        .sum();
    let l1_standard_error = rho
        .values()
        .iter()
        .map(|r| {
            let p = (r * dx).clamp(0.0, 1.0);
            (p * (1.0 - p) / n).sqrt()
        })
        .sum();

    let velocity_moment = |power: i32| -> f64 {
        let w = grid.v.weights();
        let total: f64 = f
            .x_slices()
            .map(|slice| {
                slice
                    .iter()
                    .zip(grid.v.nodes())
                    .zip(w)
                    .map(|((f, v), w)| f * v.powi(power) * w)
                    .sum::<f64>()
            })
            .sum();
        total * dx / mass
    };
    let grid_m1 = velocity_moment(1);
    let grid_m2 = velocity_moment(2);
    let (s1, s2, s4) = ens.velocities().fold((0.0, 0.0, 0.0), |(a, b, c), v| {
        (a + v, b + v * v, c + v.powi(4))
    });
    let m1 = s1 / n;
    let m2 = s2 / n;
    let m4 = s4 / n;
    MarginalReport {
        particles: ens.len(),
        t: ens.t,
        l1_distance,
        l1_standard_error,
        total_variation: rho.total_variation(),
        dx,
        mean_velocity_gap: (m1 - grid_m1).abs(),
        mean_velocity_standard_error: ((m2 - m1 * m1).max(0.0) / n).sqrt(),
        second_moment_gap: (m2 - grid_m2).abs(),
        second_moment_standard_error: ((m4 - m2 * m2).max(0.0) / n).sqrt(),
    }
}

/// Sample variance of the velocities and its standard error.
pub fn velocity_variance(ens: &ParticleEnsemble) -> (f64, f64) {
    sample_variance(ens.velocities())
}

/// Unbiased variance and its large-sample standard error
/// `sqrt((m4 - σ⁴)/n)`.
pub fn sample_variance(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let (m2, m4) = values.fold((0.0, 0.0), |(a, b), x| {
        let d = x - mean;
        (a + d * d, b + d.powi(4))
    });
    let var = m2 / (n - 1.0);
    let m4 = m4 / n;
    (var, ((m4 - var * var).max(0.0) / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_field(n: usize) -> FieldPair {
        FieldPair::zeros(n)
    }

    #[test]
    fn zero_step_is_identity() {
        let g = SpatialGrid::new(1.0, 16).unwrap();
        let mut ens =
            ParticleEnsemble::sample_product(&CosineSeries::constant(1.0), 1.0, 100, 0.1, 1.0, 3);
        let before: Vec<(f64, f64)> = ens.positions().zip(ens.velocities()).collect();
        step_particles(&g, &mut ens, &zero_field(16), 0.0).unwrap();
        let after: Vec<(f64, f64)> = ens.positions().zip(ens.velocities()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn step_bound_is_enforced() {
        let g = SpatialGrid::new(1.0, 16).unwrap();
        let mut ens =
            ParticleEnsemble::sample_product(&CosineSeries::constant(1.0), 1.0, 10, 0.1, 1.0, 3);
        assert!(matches!(
            step_particles(&g, &mut ens, &zero_field(16), 0.2 * 0.01),
            Err(Error::TimeStep { .. })
        ));
    }

    #[test]
    fn runs_are_reproducible() {
        let g = SpatialGrid::new(1.0, 16).unwrap();
        let run = || {
            let mut ens = ParticleEnsemble::sample_product(
                &CosineSeries {
                    mean: 1.0,
                    cos: vec![0.3],
                },
                1.0,
                1000,
                0.2,
                1.0,
                42,
            );
            for _ in 0..10 {
                step_particles(&g, &mut ens, &zero_field(16), 0.004).unwrap();
            }
            ens.positions().zip(ens.velocities()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn interpolation_is_periodic_and_linear() {
        let g = SpatialGrid::new(1.0, 8).unwrap();
        let values: Vec<f64> = (0..8).map(|j| j as f64).collect();
        assert_eq!(interpolate(&g, &values, 0.0), 0.0);
        assert!((interpolate(&g, &values, 1.5 / 8.0) - 1.5).abs() < 1e-14);
        // Between the last node and the wrapped first node.
        assert!((interpolate(&g, &values, 7.5 / 8.0) - 3.5).abs() < 1e-14);
    }
}
