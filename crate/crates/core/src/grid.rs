//! Periodic spatial grid, truncated velocity grid with trapezoid quadrature,
//! the discrete Maxwellian, and product initial data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Smallest velocity cutoff for which the Gaussian tail is negligible.
pub const MIN_VMAX: f64 = 6.0;
pub const MIN_NODES: usize = 8;

/// Standard one-dimensional Maxwellian `(2π)^{-1/2} exp(-v²/2)`.
#[inline]
pub fn maxwellian(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

/// Uniform periodic grid `x_j = jL/Nx` on the torus of length `L`.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    length: f64,
    nx: usize,
    dx: f64,
    spectral: Spectral,
}

impl SpatialGrid {
    pub fn new(length: f64, nx: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        if nx < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "Nx = {nx} is below {MIN_NODES}"
            )));
        }
        if !nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "Nx = {nx} is not a power of two"
            )));
        }
        Ok(Self {
            length,
            nx,
            dx: length / nx as f64,
            spectral: Spectral::new(nx, length),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.nx == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nx).map(|j| self.node(j))
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Samples `u` at the nodes.
    pub fn sample(&self, u: impl Fn(f64) -> f64) -> SpatialField {
        SpatialField::new(self.nodes().map(u).collect())
    }
}

/// Uniform velocity grid on `[-Vmax, Vmax]` with trapezoid weights and the
/// renormalised discrete Maxwellian.
#[derive(Debug, Clone)]
pub struct VelocityGrid {
    vmax: f64,
    dv: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    maxwellian: Vec<f64>,
    /// Geometric mean of neighbouring Maxwellian values, one per cell face.
    face_maxwellian: Vec<f64>,
    renormalization: f64,
}

impl VelocityGrid {
    pub fn new(vmax: f64, nv: usize) -> Result<Self> {
        if !(vmax.is_finite() && vmax >= MIN_VMAX) {
            return Err(Error::InvalidGrid(format!(
                "Vmax = {vmax} is below {MIN_VMAX}; Maxwellian truncation unsafe"
            )));
        }
        if nv < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "Nv = {nv} is below {MIN_NODES}"
            )));
        }
        let last = (nv - 1) as f64;
        let dv = 2.0 * vmax / last;
        // Written as a symmetric expression so that v_k = -v_{Nv-1-k} exactly.
        let nodes: Vec<f64> = (0..nv)
            .map(|k| vmax * (2.0 * k as f64 - last) / last)
            .collect();
        let weights: Vec<f64> = (0..nv)
            .map(|k| if k == 0 || k == nv - 1 { 0.5 * dv } else { dv })
            .collect();
        let sampled: Vec<f64> = nodes.iter().map(|&v| maxwellian(v)).collect();
        let raw_mass: f64 = sampled.iter().zip(&weights).map(|(m, w)| m * w).sum();
        let renormalization = 1.0 / raw_mass;
        let maxwellian: Vec<f64> = sampled.iter().map(|m| m * renormalization).collect();
        let face_maxwellian = maxwellian
            .windows(2)
            .map(|pair| (pair[0] * pair[1]).sqrt())
            .collect();
        Ok(Self {
            vmax,
            dv,
            nodes,
            weights,
            maxwellian,
            face_maxwellian,
            renormalization,
        })
    }

    pub fn vmax(&self) -> f64 {
        self.vmax
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Discrete Maxwellian `M_h(v_k)`, normalised so that `Σ w_k M_h = 1`.
    pub fn maxwellian(&self) -> &[f64] {
        &self.maxwellian
    }

    pub(crate) fn face_maxwellian(&self) -> &[f64] {
        &self.face_maxwellian
    }

    /// Factor applied to the sampled Gaussian to make its discrete mass one.
    pub fn renormalization(&self) -> f64 {
        self.renormalization
    }
}

/// The pair of grids spanning phase space.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    pub x: SpatialGrid,
    pub v: VelocityGrid,
}

impl PhaseGrid {
    pub fn new(length: f64, nx: usize, vmax: f64, nv: usize) -> Result<Self> {
        Ok(Self {
            x: SpatialGrid::new(length, nx)?,
            v: VelocityGrid::new(vmax, nv)?,
        })
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nv(&self) -> usize {
        self.v.len()
    }
}

pub fn build_grids(config: &SimConfig) -> Result<PhaseGrid> {
    PhaseGrid::new(config.length, config.nx, config.vmax, config.nv)
}

/// Values on the spatial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `Σ u_j Δx`.
    pub fn integral(&self, grid: &SpatialGrid) -> f64 {
        self.values.iter().sum::<f64>() * grid.dx()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete `L^p_x` norm `(Σ |u_j|^p Δx)^{1/p}`; `p = ∞` gives the max norm.
    pub fn lp_norm(&self, grid: &SpatialGrid, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let sum: f64 = self.values.iter().map(|u| u.abs().powf(p)).sum();
        (sum * grid.dx()).powf(1.0 / p)
    }

    pub fn l2_norm(&self, grid: &SpatialGrid) -> f64 {
        let sum: f64 = self.values.iter().map(|u| u * u).sum();
        (sum * grid.dx()).sqrt()
    }

    /// Discrete total variation `Σ |u_{j+1} - u_j|` with periodic wrap.
    pub fn total_variation(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|j| (self.values[(j + 1) % n] - self.values[j]).abs())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &SpatialField) -> SpatialField {
        SpatialField::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> SpatialField {
        SpatialField::new(self.values.iter().map(|v| v * factor).collect())
    }
}

/// Phase-space density `f[j, k]` stored x-major (each x-slice contiguous in v).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    nx: usize,
    nv: usize,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self {
            nx: grid.nx(),
            nv: grid.nv(),
            values: vec![0.0; grid.nx() * grid.nv()],
        }
    }

    pub fn from_fn(grid: &PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx() * grid.nv());
        for x in grid.x.nodes() {
            values.extend(grid.v.nodes().iter().map(|&v| f(x, v)));
        }
        Self {
            nx: grid.nx(),
            nv: grid.nv(),
            values,
        }
    }

    /// The local equilibrium `ρ ⊗ M_h`.
    pub fn product(grid: &PhaseGrid, rho: &SpatialField) -> Self {
        let m = grid.v.maxwellian();
        let mut values = Vec::with_capacity(grid.nx() * grid.nv());
        for &r in rho.values() {
            values.extend(m.iter().map(|mk| r * mk));
        }
        Self {
            nx: grid.nx(),
            nv: grid.nv(),
            values,
        }
    }

    pub fn from_values(grid: &PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nx() * grid.nv() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.nx() * grid.nv(),
                values.len()
            )));
        }
        Ok(Self {
            nx: grid.nx(),
            nv: grid.nv(),
            values,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.nv + k]
    }

    #[inline]
    pub fn set(&mut self, j: usize, k: usize, value: f64) {
        self.values[j * self.nv + k] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// The velocity profile at spatial node `j`.
    pub fn x_slice(&self, j: usize) -> &[f64] {
        &self.values[j * self.nv..(j + 1) * self.nv]
    }

    pub fn x_slices(&self) -> std::slice::Chunks<'_, f64> {
        self.values.chunks(self.nv)
    }

    pub fn x_slices_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.values.chunks_mut(self.nv)
    }

    /// Copy of the spatial profile at velocity node `k`.
    pub fn v_slice(&self, k: usize) -> Vec<f64> {
        (0..self.nx).map(|j| self.get(j, k)).collect()
    }

    pub fn set_v_slice(&mut self, k: usize, column: &[f64]) {
        for (j, &value) in column.iter().enumerate() {
            self.set(j, k, value);
        }
    }

    /// `Σ_{j,k} f[j,k] w_k Δx`.
    pub fn mass(&self, grid: &PhaseGrid) -> f64 {
        let w = grid.v.weights();
        let total: f64 = self
            .x_slices()
            .map(|slice| slice.iter().zip(w).map(|(f, wk)| f * wk).sum::<f64>())
            .sum();
        total * grid.x.dx()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &PhaseField) -> PhaseField {
        PhaseField {
            nx: self.nx,
            nv: self.nv,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> PhaseField {
        PhaseField {
            nx: self.nx,
            nv: self.nv,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// `mean + Σ_k a_k cos(2πkx/L)`, `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineSeries {
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
}

impl CosineSeries {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            cos: Vec::new(),
        }
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        self.cos.iter().enumerate().fold(self.mean, |acc, (i, a)| {
            acc + a * (2.0 * PI * (i + 1) as f64 * x / length).cos()
        })
    }

    /// Derivative in `x`.
    pub fn eval_derivative(&self, x: f64, length: f64) -> f64 {
        self.cos.iter().enumerate().fold(0.0, |acc, (i, a)| {
            let k = 2.0 * PI * (i + 1) as f64 / length;
            acc - a * k * (k * x).sin()
        })
    }

    pub fn sample(&self, grid: &SpatialGrid) -> SpatialField {
        grid.sample(|x| self.eval(x, grid.length()))
    }
}

/// Initial ion and electron densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    pub rho0: CosineSeries,
    pub rho_i: CosineSeries,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            rho0: CosineSeries {
                mean: 1.0,
                cos: vec![0.5],
            },
            rho_i: CosineSeries::constant(1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub f0: PhaseField,
    pub rho0: SpatialField,
    pub rho_i: SpatialField,
}

/// Well-prepared product data `f0 = ρ0 ⊗ M_h` together with `ρ0` and `ρ_i`.
pub fn initial_data(spec: &InitSpec, grid: &PhaseGrid) -> Result<InitialData> {
    let rho0 = spec.rho0.sample(&grid.x);
    let rho_i = spec.rho_i.sample(&grid.x);
    for (name, field) in [("rho0", &rho0), ("rho_i", &rho_i)] {
        if !field.is_finite() {
            return Err(Error::InvalidInitialData(format!("{name} is not finite")));
        }
        let min = field.min();
        if min <= 0.0 {
            return Err(Error::InvalidInitialData(format!(
                "{name} has nonpositive minimum {min} on the grid"
            )));
        }
    }
    let mismatch = (rho0.mean() - rho_i.mean()).abs();
    if mismatch > 1e-12 {
        return Err(Error::InvalidInitialData(format!(
            "means of rho0 and rho_i differ by {mismatch:e}"
        )));
    }
    let f0 = PhaseField::product(grid, &rho0);
    Ok(InitialData { f0, rho0, rho_i })
}
