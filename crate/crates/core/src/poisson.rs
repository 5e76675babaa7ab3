//! Spectral Poisson solver on the torus with zero-mean gauge, and periodic
//! translation of fields.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{PhaseField, SpatialField, SpatialGrid};

/// Tolerance on `mean(charge)` relative to `max(1, sup|charge|)`.
pub const NEUTRALITY_TOL: f64 = 1e-10;

/// Potential and electric field, `E = -∂_x φ`, with `mean(φ) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub potential: SpatialField,
    pub field: SpatialField,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        Self {
            potential: SpatialField::zeros(n),
            field: SpatialField::zeros(n),
        }
    }

    pub fn sup_field(&self) -> f64 {
        self.field.sup_norm()
    }
}

/// Solves `-φ'' = charge`, `E = -φ'` mode by mode.
pub fn solve_poisson(grid: &SpatialGrid, charge: &SpatialField) -> Result<FieldPair> {
    let mean = charge.mean();
    let scale = charge.sup_norm().max(1.0);
    if !mean.is_finite() {
        return Err(Error::NonFinite("poisson source"));
    }
    if mean.abs() > NEUTRALITY_TOL * scale {
        return Err(Error::NonNeutralCharge { mean });
    }
    let spectral = grid.spectral();
    let q = spectral.forward(charge.values());
    let mut phi_hat = vec![Complex64::new(0.0, 0.0); q.len()];
    let mut e_hat = vec![Complex64::new(0.0, 0.0); q.len()];
    for i in 1..q.len() {
        let k = spectral.wavenumber(i);
        phi_hat[i] = q[i] / (k * k);
        e_hat[i] = -spectral.derivative_multiplier(i) * phi_hat[i];
    }
    Ok(FieldPair {
        potential: SpatialField::new(spectral.inverse_real(phi_hat)),
        field: SpatialField::new(spectral.inverse_real(e_hat)),
    })
}

/// Field generated by `rho - rho_i`.
pub fn field_from_density(
    grid: &SpatialGrid,
    rho: &SpatialField,
    rho_i: &SpatialField,
) -> Result<FieldPair> {
    solve_poisson(grid, &rho.sub(rho_i))
}

/// `u(· + x0)` by trigonometric interpolation.
pub fn translate_field(grid: &SpatialGrid, u: &SpatialField, x0: f64) -> SpatialField {
    let x0 = x0.rem_euclid(grid.length());
    SpatialField::new(grid.spectral().translate(u.values(), x0))
}

/// Translates every velocity slice of `f` by the same `x0`.
pub fn translate_phase(grid: &SpatialGrid, f: &PhaseField, x0: f64) -> PhaseField {
    let x0 = x0.rem_euclid(grid.length());
    let mut out = f.clone();
    for k in 0..f.nv() {
        let shifted = grid.spectral().translate(&f.v_slice(k), x0);
        out.set_v_slice(k, &shifted);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(1.0, 128).unwrap()
    }

    fn max_diff(a: &SpatialField, b: &SpatialField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn zero_source() {
        let g = grid();
        let pair = solve_poisson(&g, &SpatialField::zeros(128)).unwrap();
        assert_eq!(pair.potential.sup_norm(), 0.0);
        assert_eq!(pair.field.sup_norm(), 0.0);
    }

    #[test]
    fn single_cosine_mode() {
        let g = grid();
        let q = g.sample(|x| (2.0 * PI * x).cos());
        let pair = solve_poisson(&g, &q).unwrap();
        let phi = g.sample(|x| (2.0 * PI * x).cos() / (4.0 * PI * PI));
        let e = g.sample(|x| (2.0 * PI * x).sin() / (2.0 * PI));
        assert!(max_diff(&pair.potential, &phi) < 1e-15);
        assert!(max_diff(&pair.field, &e) < 1e-15);
        assert!((pair.field.sup_norm() - 0.15915494).abs() < 1e-8);
    }

    #[test]
    fn single_sine_mode() {
        let g = grid();
        let q = g.sample(|x| (4.0 * PI * x).sin());
        let pair = solve_poisson(&g, &q).unwrap();
        let e = g.sample(|x| -(4.0 * PI * x).cos() / (4.0 * PI));
        assert!(max_diff(&pair.field, &e) < 1e-15);
    }

    #[test]
    fn density_fields() {
        let g = grid();
        let rho_i = SpatialField::constant(128, 1.0);
        let neutral = field_from_density(&g, &rho_i, &rho_i).unwrap();
        assert_eq!(neutral.field.sup_norm(), 0.0);

        let rho = g.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let pair = field_from_density(&g, &rho, &rho_i).unwrap();
        assert!((pair.field.sup_norm() - 0.07957747).abs() < 1e-8);

        let rho = g.sample(|x| 1.0 + 0.41046 * (2.0 * PI * x).cos());
        let pair = field_from_density(&g, &rho, &rho_i).unwrap();
        assert!((pair.field.sup_norm() - 0.41046 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonneutral_charge() {
        let g = grid();
        let q = SpatialField::constant(128, 1e-6);
        assert!(matches!(
            solve_poisson(&g, &q),
            Err(Error::NonNeutralCharge { .. })
        ));
    }

    #[test]
    fn translation_examples() {
        let g = grid();
        let u = g.sample(|x| (2.0 * PI * x).cos());
        assert!(max_diff(&translate_field(&g, &u, 0.0), &u) < 1e-15);
        assert!(max_diff(&translate_field(&g, &u, 1.0), &u) < 1e-14);
        let shifted = translate_field(&g, &u, 0.25);
        let expected = g.sample(|x| -(2.0 * PI * x).sin());
        assert!(max_diff(&shifted, &expected) < 1e-12);
    }
}
