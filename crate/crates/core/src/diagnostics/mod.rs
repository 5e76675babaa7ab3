//! Observables of the diffusive limit: marginals, Maxwellian-weighted norms,
//! dissipations, field discrepancies and translation moduli.

mod decomposition;
mod fit;
mod record;
mod theory;

pub use decomposition::{error_decomposition, ErrorDecomposition, TimeL2};
pub use fit::{fit_rate, RateFit};
pub use record::{CsvSink, DiagnosticsContext, DiagnosticsRecord, DiagnosticsSink};
pub use theory::{
    beta, c_rho0_rhoi, gamma, holder_seminorm, t_epsilon, well_preparedness, HolderNorm,
};

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::grid::{PhaseField, PhaseGrid, SpatialField, SpatialGrid};
use crate::poisson::{field_from_density, translate_phase};

/// `ρ(x_j) = Σ_k w_k f[j,k]`.
pub fn marginal(grid: &PhaseGrid, f: &PhaseField) -> SpatialField {
    let w = grid.v.weights();
    SpatialField::new(
        f.x_slices()
            .map(|slice| slice.iter().zip(w).map(|(f, wk)| f * wk).sum())
            .collect(),
    )
}

/// Marginal along sheared characteristics, `π(x_j) = Σ_k w_k f(x_j - ε v_k, v_k)`.
///
/// The translations are applied as Fourier multipliers and summed in spectral
/// space, so only one inverse transform is needed.
pub fn shifted_marginal(grid: &PhaseGrid, f: &PhaseField, epsilon: f64) -> SpatialField {
    if epsilon == 0.0 {
        return marginal(grid, f);
    }
    let spectral = grid.x.spectral();
    let length = grid.x.length();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.nx()];
    for (k, (&v, &w)) in grid.v.nodes().iter().zip(grid.v.weights()).enumerate() {
        let x0 = (-epsilon * v).rem_euclid(length);
        let spec = spectral.forward(&f.v_slice(k));
        for (i, (a, c)) in acc.iter_mut().zip(&spec).enumerate() {
            *a += c * spectral.shift_multiplier(i, x0) * w;
        }
    }
    SpatialField::new(spectral.inverse_real(acc))
}

/// `‖f‖_{L^p(M)} = (Σ |f/M_h|^p M_h w Δx)^{1/p}`.
pub fn weighted_lp_norm(grid: &PhaseGrid, f: &PhaseField, p: f64) -> f64 {
    let m = grid.v.maxwellian();
    let w = grid.v.weights();
    let sum: f64 = f
        .x_slices()
        .map(|slice| {
            slice
                .iter()
                .zip(m)
                .zip(w)
                .map(|((f, mk), wk)| (f / mk).abs().powf(p) * mk * wk)
                .sum::<f64>()
        })
        .sum();
    (sum * grid.x.dx()).powf(1.0 / p)
}

/// `‖f - ρ ⊗ M_h‖_{L²(M)}`.
pub fn distance_to_equilibrium(grid: &PhaseGrid, f: &PhaseField, rho: &SpatialField) -> f64 {
    let m = grid.v.maxwellian();
    let w = grid.v.weights();
    let sum: f64 = f
        .x_slices()
        .zip(rho.values())
        .map(|(slice, r)| {
            slice
                .iter()
                .zip(m)
                .zip(w)
                .map(|((f, mk), wk)| {
                    let d = f / mk - r;
                    d * d * mk * wk
                })
                .sum::<f64>()
        })
        .sum();
    (sum * grid.x.dx()).sqrt()
}

/// Centered-difference velocity derivative with one-sided ends.
fn velocity_derivative(values: &[f64], dv: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| match k {
            0 => (values[1] - values[0]) / dv,
            _ if k == n - 1 => (values[n - 1] - values[n - 2]) / dv,
            _ => (values[k + 1] - values[k - 1]) / (2.0 * dv),
        })
        .collect()
}

/// Fokker–Planck dissipation `(p-1) ∫∫ |∂_v(f/M)|² |f/M|^{p-2} M`.
pub fn fp_dissipation(grid: &PhaseGrid, f: &PhaseField, p: f64) -> f64 {
    let m = grid.v.maxwellian();
    let w = grid.v.weights();
    let dv = grid.v.dv();
    let sum: f64 = f
        .x_slices()
        .map(|slice| {
            let g: Vec<f64> = slice.iter().zip(m).map(|(f, mk)| f / mk).collect();
            let dg = velocity_derivative(&g, dv);
            g.iter()
                .zip(&dg)
                .zip(m.iter().zip(w))
                .map(|((g, d), (mk, wk))| d * d * power_weight(*g, p) * mk * wk)
                .sum::<f64>()
        })
        .sum();
    (p - 1.0) * sum * grid.x.dx()
}

/// Laplace dissipation `(p-1) ∫ |∂_x ρ|² |ρ|^{p-2}` with spectral `∂_x`.
pub fn laplace_dissipation(grid: &SpatialGrid, rho: &SpatialField, p: f64) -> f64 {
    let d = grid.spectral().derivative(rho.values());
    let sum: f64 = d
        .iter()
        .zip(rho.values())
        .map(|(d, r)| d * d * power_weight(*r, p))
        .sum();
    (p - 1.0) * sum * grid.dx()
}

#[inline]
fn power_weight(g: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else {
        g.abs().powf(p - 2.0)
    }
}

/// `sup_j |E^ε(x_j) - I^ε(x_j)|`, the fields generated by the marginal and the
/// shifted marginal.
pub fn field_discrepancy(
    grid: &PhaseGrid,
    f: &PhaseField,
    rho_i: &SpatialField,
    epsilon: f64,
) -> Result<f64> {
    let rho = marginal(grid, f);
    let pi = shifted_marginal(grid, f, epsilon);
    discrepancy_of(grid, &rho, &pi, rho_i)
}

pub(crate) fn discrepancy_of(
    grid: &PhaseGrid,
    rho: &SpatialField,
    pi: &SpatialField,
    rho_i: &SpatialField,
) -> Result<f64> {
    let e = field_from_density(&grid.x, rho, rho_i)?;
    let i = field_from_density(&grid.x, pi, rho_i)?;
    Ok(e.field.sub(&i.field).sup_norm())
}

/// Dyadic shifts `Δx·2^m ≤ min(1, L)`.
pub fn default_shifts(grid: &SpatialGrid) -> Vec<f64> {
    let limit = grid.length().min(1.0);
    let mut shifts = Vec::new();
    let mut s = grid.dx();
    while s <= limit * (1.0 + 1e-12) {
        shifts.push(s);
        s *= 2.0;
    }
    shifts
}

/// `max_{x0} |x0|^{-β} ‖τ_{x0} f - f‖_{L^p(M)}` over the given shifts.
pub fn translation_modulus(
    grid: &PhaseGrid,
    f: &PhaseField,
    beta: f64,
    p: f64,
    shifts: &[f64],
) -> f64 {
    shifts
        .iter()
        .map(|&x0| {
            let moved = translate_phase(&grid.x, f, x0);
            weighted_lp_norm(grid, &moved.sub(f), p) / x0.abs().powf(beta)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::translate_field;
    use std::f64::consts::PI;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(1.0, 128, 8.0, 256).unwrap()
    }

    fn cosine_product(g: &PhaseGrid, a: f64) -> PhaseField {
        PhaseField::product(g, &g.x.sample(|x| 1.0 + a * (2.0 * PI * x).cos()))
    }

    /// `(1 + c v) M_h` at every x node.
    fn tilted(g: &PhaseGrid, c: f64) -> PhaseField {
        let m = g.v.maxwellian();
        let values = (0..g.nx())
            .flat_map(|_| {
                g.v.nodes()
                    .iter()
                    .zip(m)
                    .map(move |(v, mk)| (1.0 + c * v) * mk)
            })
            .collect();
        PhaseField::from_values(g, values).unwrap()
    }

    #[test]
    fn marginal_examples() {
        let g = grid();
        let rho = g.x.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let m = marginal(&g, &PhaseField::product(&g, &rho));
        assert!(m.sub(&rho).sup_norm() < 1e-14);
        assert_eq!(marginal(&g, &PhaseField::zeros(&g)).sup_norm(), 0.0);
        let m = marginal(&g, &tilted(&g, 0.1));
        assert!(m.values().iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn shifted_marginal_examples() {
        let g = grid();
        let f = cosine_product(&g, 0.5);
        let pi0 = shifted_marginal(&g, &f, 0.0);
        assert_eq!(pi0, marginal(&g, &f));

        let flat = PhaseField::product(&g, &SpatialField::constant(g.nx(), 1.3));
        let pi = shifted_marginal(&g, &flat, 0.1);
        assert!(pi.sub(&marginal(&g, &flat)).sup_norm() < 1e-13);

        let eps: f64 = 0.1;
        let damping = (-2.0 * PI * PI * eps * eps).exp();
        assert!((0.5 * damping - 0.4104344).abs() < 1e-7);
        let pi = shifted_marginal(&g, &f, eps);
        let expected = g.x.sample(|x| 1.0 + 0.5 * damping * (2.0 * PI * x).cos());
        assert!(pi.sub(&expected).sup_norm() < 1e-10);
    }

    #[test]
    fn shift_direction_follows_sheared_characteristics() {
        // A single velocity population v > 0 displaced by ε v to the left.
        let g = PhaseGrid::new(1.0, 64, 8.0, 129).unwrap();
        let k = 96;
        let v = g.v.nodes()[k];
        let mut f = PhaseField::zeros(&g);
        let profile = g.x.sample(|x| (2.0 * PI * x).sin());
        for j in 0..g.nx() {
            f.set(j, k, profile.values()[j] / g.v.weights()[k]);
        }
        let eps = 0.05;
        let pi = shifted_marginal(&g, &f, eps);
        let expected = translate_field(&g.x, &profile, -eps * v);
        assert!(pi.sub(&expected).sup_norm() < 1e-12);
    }

    #[test]
    fn weighted_norm_examples() {
        let g = grid();
        let flat = PhaseField::product(&g, &SpatialField::constant(g.nx(), 1.0));
        for p in [1.0, 2.0, 4.0] {
            assert!((weighted_lp_norm(&g, &flat, p) - 1.0).abs() < 1e-14);
        }
        let rho = g.x.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let f = PhaseField::product(&g, &rho);
        for p in [2.0, 3.0, 4.0] {
            assert!((weighted_lp_norm(&g, &f, p) - rho.lp_norm(&g.x, p)).abs() < 1e-13);
        }
        assert!((weighted_lp_norm(&g, &f, 2.0) - 1.125f64.sqrt()).abs() < 1e-10);
        assert!((1.125f64.sqrt() - 1.0606602).abs() < 1e-7);
    }

    #[test]
    fn fp_dissipation_examples() {
        let g = grid();
        let f = cosine_product(&g, 0.5);
        assert!(fp_dissipation(&g, &f, 2.0) < 1e-20);
        assert!(fp_dissipation(&g, &f, 4.0) < 1e-20);
        let t = tilted(&g, 0.1);
        assert!((fp_dissipation(&g, &t, 2.0) - 0.01).abs() < 1e-6);
        let scaled = t.scaled(3.0);
        let ratio = fp_dissipation(&g, &scaled, 2.0) / fp_dissipation(&g, &t, 2.0);
        assert!((ratio - 9.0).abs() < 1e-12);
    }

    #[test]
    fn laplace_dissipation_examples() {
        let g = grid();
        let flat = SpatialField::constant(g.nx(), 2.0);
        assert!(laplace_dissipation(&g.x, &flat, 2.0) < 1e-25);
        let rho = g.x.sample(|x| 1.0 + 0.5 * (2.0 * PI * x).cos());
        let d = laplace_dissipation(&g.x, &rho, 2.0);
        assert!((d - PI * PI / 2.0).abs() < 1e-8);
        assert!((d - 4.9348022).abs() < 1e-7);
        let rho2 = g.x.sample(|x| 1.0 + 1.0 * (2.0 * PI * x).cos());
        let d2 = laplace_dissipation(&g.x, &rho2, 2.0);
        assert!((d2 / d - 4.0).abs() < 1e-10);
    }

    #[test]
    fn field_discrepancy_examples() {
        let g = grid();
        let rho_i = SpatialField::constant(g.nx(), 1.0);
        let f = cosine_product(&g, 0.5);
        assert_eq!(field_discrepancy(&g, &f, &rho_i, 0.0).unwrap(), 0.0);
        let flat = PhaseField::product(&g, &rho_i);
        assert!(field_discrepancy(&g, &flat, &rho_i, 0.1).unwrap() < 1e-15);
        let eps: f64 = 0.1;
        let expected = 0.5 * (1.0 - (-2.0 * PI * PI * eps * eps).exp()) / (2.0 * PI);
        assert!((expected - 0.0142548).abs() < 1e-7);
        let d = field_discrepancy(&g, &f, &rho_i, eps).unwrap();
        assert!((d - expected).abs() < 1e-8, "{d}");
    }

    #[test]
    fn translation_modulus_examples() {
        let g = grid();
        let flat = PhaseField::product(&g, &SpatialField::constant(g.nx(), 1.0));
        assert!(translation_modulus(&g, &flat, 1.0, 2.0, &default_shifts(&g.x)) < 1e-14);

        let f = cosine_product(&g, 0.5);
        let m = translation_modulus(&g, &f, 1.0, 2.0, &[0.25]);
        assert!((m - 2.0).abs() < 1e-8);

        let shifted = translate_phase(&g.x, &f, 0.1);
        let shifts = default_shifts(&g.x);
        let a = translation_modulus(&g, &f, 1.0, 2.0, &shifts);
        let b = translation_modulus(&g, &shifted, 1.0, 2.0, &shifts);
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn default_shift_set_is_dyadic() {
        let g = grid();
        let shifts = default_shifts(&g.x);
        assert_eq!(shifts.len(), 8);
        assert_eq!(shifts[0], 1.0 / 128.0);
        assert_eq!(*shifts.last().unwrap(), 1.0);
    }
}
