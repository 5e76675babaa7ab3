//! Exponents, constants and the validity horizon of the convergence estimate.

use crate::grid::{PhaseField, PhaseGrid, SpatialField, SpatialGrid};

use super::{default_shifts, marginal, translation_modulus, weighted_lp_norm};

/// `γ = 1 - d/p`.
pub fn gamma(p: f64, d: usize) -> f64 {
    1.0 - d as f64 / p
}

/// `β = (p - d)/(p - 1)`.
pub fn beta(p: f64, d: usize) -> f64 {
    (p - d as f64) / (p - 1.0)
}

/// `max(‖ρ0‖²_p, ‖ρ_i‖_{p+1}^{2-2/p²}, ‖ρ0‖_∞, ‖ρ_i‖_∞)` with discrete norms.
pub fn c_rho0_rhoi(grid: &SpatialGrid, rho0: &SpatialField, rho_i: &SpatialField, p: f64) -> f64 {
    let entries = [
        rho0.lp_norm(grid, p).powi(2),
        rho_i.lp_norm(grid, p + 1.0).powf(2.0 - 2.0 / (p * p)),
        rho0.sup_norm(),
        rho_i.sup_norm(),
    ];
    entries.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Validity horizon
///
/// ```text
/// T^ε = ln(1 + C ε^{-γ} / (4 (‖f0‖_p² + c m_p² ε^{γ(1 + 2/(p-1))}))) / (C c)
/// ```
///
/// with `C = c_const` and `c = c_calib` standing in for the unnamed constant.
pub fn t_epsilon(
    f0_norm_p: f64,
    m_p: f64,
    c_const: f64,
    gamma: f64,
    p: f64,
    epsilon: f64,
    c_calib: f64,
) -> f64 {
    let tail = c_calib * m_p * m_p * epsilon.powf(gamma * (1.0 + 2.0 / (p - 1.0)));
    let ratio = c_const * epsilon.powf(-gamma) / (4.0 * (f0_norm_p * f0_norm_p + tail));
    ratio.ln_1p() / (c_const * c_calib)
}

/// Estimate of the constant `m_p` bounding the initial data:
/// `‖f0‖_p + modulus_β(f0) + ε^{-β} ‖ρ^ε_0 - ρ0‖_{L^p}`.
pub fn well_preparedness(
    grid: &PhaseGrid,
    f0: &PhaseField,
    rho0: &SpatialField,
    epsilon: f64,
    p: f64,
    beta: f64,
) -> f64 {
    let norm = weighted_lp_norm(grid, f0, p);
    let modulus = translation_modulus(grid, f0, beta, p, &default_shifts(&grid.x));
    let mismatch = marginal(grid, f0).sub(rho0).lp_norm(&grid.x, p);
    norm + modulus + epsilon.powf(-beta) * mismatch
}

/// Discrete `C^{0,γ}` norm split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderNorm {
    /// `max_{j≠j'} |u_j - u_j'| / dist(x_j, x_j')^γ` with periodic distance.
    pub seminorm: f64,
    pub sup: f64,
}

impl HolderNorm {
    pub fn total(&self) -> f64 {
        self.seminorm + self.sup
    }
}

/// Brute force over all node pairs.
pub fn holder_seminorm(grid: &SpatialGrid, u: &SpatialField, gamma: f64) -> HolderNorm {
    let values = u.values();
    let n = values.len();
    let length = grid.length();
    let mut seminorm: f64 = 0.0;
    for j in 0..n {
        for jp in (j + 1)..n {
            let raw = (jp - j) as f64 * grid.dx();
            let dist = raw.min(length - raw);
            seminorm = seminorm.max((values[j] - values[jp]).abs() / dist.powf(gamma));
        }
    }
    HolderNorm {
        seminorm,
        sup: u.sup_norm(),
    }
}
