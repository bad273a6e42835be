#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{NqpError, Result};
use crate::grid::PhaseSpaceGrid;

/// Dense row-major complex square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub d: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(d: usize) -> Self {
        CMatrix { d, data: vec![Complex64::new(0.0, 0.0); d * d] }
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[i * d + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.d + j] = v;
    }

    /// Exact Hermiticity: `a_ij == conj(a_ji)` bit for bit.
    pub fn is_hermitian(&self) -> bool {
        (0..self.d).all(|i| (i..self.d).all(|j| self.get(i, j) == self.get(j, i).conj()))
    }

    /// `(A + A^dag) / 2`, with the lower triangle written as the conjugate of the
    /// upper so the result is exactly Hermitian.
    pub fn hermitized(&self) -> Self {
        let mut out = Self::zeros(self.d);
        for i in 0..self.d {
            for j in i..self.d {
                let v = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
                let v = if i == j { Complex64::new(v.re, 0.0) } else { v };
                out.set(i, j, v);
                out.set(j, i, v.conj());
            }
        }
        out
    }

    /// Leading principal submatrix of size `n`.
    pub fn leading(&self, n: usize) -> Self {
        Self::from_fn(n, |i, j| self.get(i, j))
    }

    /// `psi^dag A psi`.
    pub fn quadratic_form(&self, psi: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.d {
            for j in 0..self.d {
                s += psi[i].conj() * self.get(i, j) * psi[j];
            }
        }
        s
    }
}

/// Dense row-major real square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    pub d: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(d: usize) -> Self {
        RMatrix { d, data: vec![0.0; d * d] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    /// Elementwise `(S + S^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.d);
        for i in 0..self.d {
            for j in i..self.d {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, v);
                out.set(j, i, v);
            }
        }
        out
    }

    pub fn leading(&self, n: usize) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }
}

/// Unit vector selecting a DV projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionVector {
    components: Vec<Complex64>,
}

impl ProjectionVector {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        if components.is_empty() {
            return Err(NqpError::param("projection vector is empty"));
        }
        let norm: f64 = components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(NqpError::param(alloc::format!("projection vector has norm {norm}, expected 1")));
        }
        Ok(ProjectionVector { components })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(mut components: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(NqpError::param("projection vector must be nonzero and finite"));
        }
        for c in &mut components {
            *c /= norm;
        }
        Ok(ProjectionVector { components })
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); d];
        c[k] = Complex64::new(1.0, 0.0);
        ProjectionVector { components: c }
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Estimated NQP matrices and their elementwise errors on a phase-space grid.
///
/// Point `k` of `values`/`errors` is grid point `grid.point(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NqpMatrixField {
    pub grid: PhaseSpaceGrid,
    pub d: usize,
    pub w: f64,
    pub values: Vec<CMatrix>,
    pub errors: Vec<RMatrix>,
}

impl NqpMatrixField {
    /// Builds a field, Hermitizing values and symmetrizing errors.
    pub fn new(grid: PhaseSpaceGrid, d: usize, w: f64, values: Vec<CMatrix>, errors: Vec<RMatrix>) -> Result<Self> {
        if values.len() != grid.len() || errors.len() != grid.len() {
            return Err(NqpError::data("field size does not match the grid"));
        }
        if values.iter().any(|m| m.d != d) || errors.iter().any(|m| m.d != d) {
            return Err(NqpError::data("matrix dimension does not match d"));
        }
        if errors.iter().any(|e| e.data.iter().any(|&s| !(s >= 0.0))) {
            return Err(NqpError::data("errors must be non-negative"));
        }
        Ok(NqpMatrixField {
            grid,
            d,
            w,
            values: values.iter().map(CMatrix::hermitized).collect(),
            errors: errors.iter().map(RMatrix::symmetrized).collect(),
        })
    }

    /// Grid-integrated diagonal element `n` (trapezoid rule).
    pub fn integrate_diagonal(&self, n: usize) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.values.iter().zip(&w).map(|(m, w)| w * m.get(n, n).re).sum()
    }
}
