//! Periodic Fourier helpers shared by the Poisson solver, the transport step
//! and the shifted marginal.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT plans for one periodic grid.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Spectral {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            length,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed mode index of FFT bin `i`; the Nyquist bin maps to `+n/2`.
    #[inline]
    pub fn mode(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        self.n.is_multiple_of(2) && i == self.n / 2
    }

    /// Angular wavenumber `2πk/L` of bin `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode(i) as f64 / self.length
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(u.len(), self.n);
        let mut buf: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/n` normalisation; returns the real part.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Multiplier that maps the spectrum of `u` to that of `u(· + x0)`.
    ///
    /// The Nyquist bin gets `cos(k x0)`, i.e. the real trigonometric
    /// interpolant evaluated on the shifted nodes.
    #[inline]
    pub fn shift_multiplier(&self, i: usize, x0: f64) -> Complex64 {
        let theta = self.wavenumber(i) * x0;
        if self.is_nyquist(i) {
            Complex64::new(theta.cos(), 0.0)
        } else {
            Complex64::new(theta.cos(), theta.sin())
        }
    }

    /// Spectral derivative multiplier `ik`, zero on the Nyquist bin.
    #[inline]
    pub fn derivative_multiplier(&self, i: usize) -> Complex64 {
        if self.is_nyquist(i) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, self.wavenumber(i))
        }
    }

    pub fn translate(&self, u: &[f64], x0: f64) -> Vec<f64> {
        let mut spec = self.forward(u);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= self.shift_multiplier(i, x0);
        }
        self.inverse_real(spec)
    }

    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        let mut spec = self.forward(u);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= self.derivative_multiplier(i);
        }
        self.inverse_real(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_indices_wrap() {
        let s = Spectral::new(8, 1.0);
        let modes: Vec<i64> = (0..8).map(|i| s.mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert!(s.is_nyquist(4));
    }

    #[test]
    fn derivative_of_sine() {
        let n = 32;
        let s = Spectral::new(n, 1.0);
        let u: Vec<f64> = (0..n)
            .map(|j| (2.0 * PI * j as f64 / n as f64).sin())
            .collect();
        let du = s.derivative(&u);
        for (j, d) in du.iter().enumerate() {
            let x = j as f64 / n as f64;
            assert!((d - 2.0 * PI * (2.0 * PI * x).cos()).abs() < 1e-12);
        }
    }
}
