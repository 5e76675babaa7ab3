use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::FluidTrajectory;
use crate::grid::{PhaseField, PhaseGrid};

use super::{distance_to_equilibrium, marginal, shifted_marginal};

/// Running `L²(0, t)` norm of a sampled nonnegative quantity, trapezoid in time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeL2 {
    last: Option<(f64, f64)>,
    integral: f64,
}

impl TimeL2 {
    pub fn push(&mut self, t: f64, value: f64) {
        if let Some((t0, v0)) = self.last {
            self.integral += 0.5 * (t - t0) * (v0 * v0 + value * value);
        }
        self.last = Some((t, value));
    }

    pub fn value(&self) -> f64 {
        self.integral.sqrt()
    }
}

/// Time-integrated errors `E1 = ‖f - ρ^ε M‖`, `E2 = ‖ρ^ε - π^ε‖`,
/// `E3 = ‖π^ε - ρ‖` and `total = ‖f - ρ M‖`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub total: f64,
}

/// Instantaneous norms entering the decomposition at one time level.
pub(crate) struct Pointwise {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub total: f64,
}

pub(crate) fn pointwise(
    grid: &PhaseGrid,
    f: &PhaseField,
    rho_limit: &crate::grid::SpatialField,
    epsilon: f64,
) -> Pointwise {
    let rho_eps = marginal(grid, f);
    let pi = shifted_marginal(grid, f, epsilon);
    Pointwise {
        e1: distance_to_equilibrium(grid, f, &rho_eps),
        e2: rho_eps.sub(&pi).l2_norm(&grid.x),
        e3: pi.sub(rho_limit).l2_norm(&grid.x),
        total: distance_to_equilibrium(grid, f, rho_limit),
    }
}

/// Accumulates the four running integrals.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct DecompositionAccumulator {
    pub e1: TimeL2,
    pub e2: TimeL2,
    pub e3: TimeL2,
    pub total: TimeL2,
}

impl DecompositionAccumulator {
    pub fn push(&mut self, t: f64, p: &Pointwise) {
        self.e1.push(t, p.e1);
        self.e2.push(t, p.e2);
        self.e3.push(t, p.e3);
        self.total.push(t, p.total);
    }

    pub fn current(&self) -> ErrorDecomposition {
        ErrorDecomposition {
            e1: self.e1.value(),
            e2: self.e2.value(),
            e3: self.e3.value(),
            total: self.total.value(),
        }
    }
}

/// Decomposes the distance between a kinetic trajectory and the limit
/// `ρ ⊗ M_h`; both trajectories must share one time schedule.
pub fn error_decomposition(
    grid: &PhaseGrid,
    kinetic: &[(f64, PhaseField)],
    fluid: &FluidTrajectory,
    epsilon: f64,
) -> Result<ErrorDecomposition> {
    if kinetic.len() != fluid.times.len() {
        return Err(Error::ScheduleMismatch(format!(
            "{} kinetic samples vs {} fluid samples",
            kinetic.len(),
            fluid.times.len()
        )));
    }
    let mut acc = DecompositionAccumulator::default();
    for ((t, f), (tf, rho)) in kinetic.iter().zip(fluid.times.iter().zip(&fluid.rho)) {
        if (t - tf).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::ScheduleMismatch(format!(
                "kinetic t = {t}, fluid t = {tf}"
            )));
        }
        acc.push(*t, &pointwise(grid, f, rho, epsilon));
    }
    Ok(acc.current())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialField;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_of_constant() {
        let mut acc = TimeL2::default();
        for i in 0..=10 {
            acc.push(i as f64 * 0.1, 2.0);
        }
        assert!((acc.value() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equilibrium_trajectory_has_zero_error() {
        let g = PhaseGrid::new(1.0, 32, 8.0, 64).unwrap();
        let times: Vec<f64> = (0..5).map(|i| i as f64 * 0.1).collect();
        let rho: Vec<SpatialField> = times
            .iter()
            .map(|t| {
                g.x.sample(|x| 1.0 + 0.5 * (-t).exp() * (2.0 * PI * x).cos())
            })
            .collect();
        let kinetic: Vec<(f64, PhaseField)> = times
            .iter()
            .zip(&rho)
            .map(|(t, r)| (*t, PhaseField::product(&g, r)))
            .collect();
        let fluid = FluidTrajectory { times, rho };
        let d = error_decomposition(&g, &kinetic, &fluid, 0.0).unwrap();
        assert!(d.e1 < 1e-15 && d.e2 == 0.0 && d.e3 < 1e-15 && d.total < 1e-15);
    }

    #[test]
    fn schedule_mismatch_is_rejected() {
        let g = PhaseGrid::new(1.0, 32, 8.0, 64).unwrap();
        let rho = SpatialField::constant(32, 1.0);
        let fluid = FluidTrajectory {
            times: vec![0.0, 0.1],
            rho: vec![rho.clone(), rho.clone()],
        };
        let f = PhaseField::product(&g, &rho);
        let kinetic = vec![(0.0, f.clone()), (0.2, f)];
        assert!(matches!(
            error_decomposition(&g, &kinetic, &fluid, 0.1),
            Err(Error::ScheduleMismatch(_))
        ));
    }
}
