#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{NqpError, Result};

/// Regular rectangular lattice in phase space. Points are ordered with the real
/// part varying fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        PhaseSpaceGrid { re_min: -5.0, re_max: 5.0, im_min: -5.0, im_max: 5.0, n_re: 101, n_im: 101 }
    }
}

impl PhaseSpaceGrid {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64, n_re: usize, n_im: usize) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || !(re_min < re_max) || !(im_min < im_max) {
            return Err(NqpError::param("grid bounds must be finite with min < max"));
        }
        if n_re < 2 || n_im < 2 {
            return Err(NqpError::param("grid needs at least 2 points per axis"));
        }
        Ok(PhaseSpaceGrid { re_min, re_max, im_min, im_max, n_re, n_im })
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn re_step(&self) -> f64 {
        (self.re_max - self.re_min) / (self.n_re - 1) as f64
    }

    pub fn im_step(&self) -> f64 {
        (self.im_max - self.im_min) / (self.n_im - 1) as f64
    }

    pub fn re_at(&self, i: usize) -> f64 {
        if i + 1 == self.n_re { self.re_max } else { self.re_min + i as f64 * self.re_step() }
    }

    pub fn im_at(&self, j: usize) -> f64 {
        if j + 1 == self.n_im { self.im_max } else { self.im_min + j as f64 * self.im_step() }
    }

    /// Point with flat index `k`.
    pub fn point(&self, k: usize) -> Complex64 {
        Complex64::new(self.re_at(k % self.n_re), self.im_at(k / self.n_re))
    }

    pub fn points(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Largest modulus over the grid.
    pub fn max_modulus(&self) -> f64 {
        let r = self.re_min.abs().max(self.re_max.abs());
        let i = self.im_min.abs().max(self.im_max.abs());
        libm::hypot(r, i)
    }

    /// Two-dimensional trapezoid weights, one per point.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let cell = self.re_step() * self.im_step();
        (0..self.len())
            .map(|k| {
                let i = k % self.n_re;
                let j = k / self.n_re;
                let wr = if i == 0 || i + 1 == self.n_re { 0.5 } else { 1.0 };
                let wi = if j == 0 || j + 1 == self.n_im { 0.5 } else { 1.0 };
                cell * wr * wi
            })
            .collect()
    }

    pub fn same_as(&self, other: &PhaseSpaceGrid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_lattice() {
        let g = PhaseSpaceGrid::default();
        assert_eq!(g.len(), 10201);
        assert_eq!(g.point(0), Complex64::new(-5.0, -5.0));
        assert_eq!(g.point(100), Complex64::new(5.0, -5.0));
        assert_eq!(g.point(10200), Complex64::new(5.0, 5.0));
        assert!((g.point(50 + 101 * 50)).norm() < 1e-15);
        let s: f64 = g.trapezoid_weights().iter().sum();
        assert!((s - 100.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(PhaseSpaceGrid::new(1.0, 1.0, 0.0, 1.0, 3, 3).is_err());
        assert!(PhaseSpaceGrid::new(0.0, 1.0, 0.0, 1.0, 1, 3).is_err());
        assert!(PhaseSpaceGrid::new(0.0, f64::NAN, 0.0, 1.0, 3, 3).is_err());
    }
}
