//! Quartic-exponential autocorrelation filter `Omega_w`.
//!
//! `Omega_w(b) = Omega_1(b / w)` with
//! `Omega_1(beta) = exp(-beta^4 / 8) J(beta) / J(0)`,
//! `J(beta) = int_0^inf exp(-2 t^2 - t beta^2) i0e(t beta^2) dt`,
//! which is the two-dimensional autocorrelation integral after the angular
//! integration has been done in closed form.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{NqpError, Result};
use crate::numeric::interp::CubicTable;
use crate::numeric::quad::integrate_adaptive;
use crate::numeric::special::i0e;

pub const DEFAULT_TABLE_SIZE: usize = 2048;
const DECAY: f64 = 1e-12;
const J_UPPER: f64 = 7.0;

/// `J(0) = sqrt(pi/2) / 2`.
fn j0() -> f64 {
    0.5 * (0.5 * PI).sqrt()
}

/// `ln Omega_1(beta)` by adaptive quadrature.
pub fn ln_omega_unit(beta: f64, rel_tol: f64) -> Result<f64> {
    let q = beta * beta;
    if q == 0.0 {
        return Ok(0.0);
    }
    let j = integrate_adaptive(|t| (-2.0 * t * t - t * q).exp() * i0e(t * q), 0.0, J_UPPER, rel_tol, 0.0)
        .map_err(|e| NqpError::numerical(alloc::format!("filter integral at beta = {beta}: {e}")))?;
    Ok(-q * q / 8.0 + (j / j0()).ln())
}

/// Autocorrelation integral `A_w(0) = int d^2 g exp(-2 |g/w|^4)`; the filter
/// normalization is its inverse.
pub fn autocorrelation_at_origin(w: f64) -> f64 {
    w * w * PI * j0()
}

/// Tabulated filter kernel for a fixed width.
#[derive(Clone, Debug)]
pub struct FilterKernel {
    w: f64,
    b_max: f64,
    n_table: usize,
    ln_table: CubicTable,
}

impl FilterKernel {
    /// Kernel with the automatically chosen cutoff and the default table size.
    pub fn new(w: f64) -> Result<Self> {
        let b_max = Self::auto_b_max(w)?;
        Self::build(w, b_max, DEFAULT_TABLE_SIZE)
    }

    pub fn build(w: f64, b_max: f64, n_table: usize) -> Result<Self> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(NqpError::param(alloc::format!("filter width must be positive, got {w}")));
        }
        if !(b_max > 0.0) || !b_max.is_finite() {
            return Err(NqpError::param(alloc::format!("b_max must be positive, got {b_max}")));
        }
        if n_table < 64 {
            return Err(NqpError::param("n_table must be at least 64"));
        }
        let h = b_max / (n_table - 1) as f64;
        let f = (0..n_table)
            .map(|i| ln_omega_unit(i as f64 * h / w, 1e-13))
            .collect::<Result<Vec<f64>>>()?;
        Ok(FilterKernel { w, b_max, n_table, ln_table: CubicTable { x0: 0.0, h, f } })
    }

    /// Smallest `b` on a 0.01 scan beyond which both `exp(b^2/2) Omega_w(b)` and
    /// `b exp(b^2/2) Omega_w(b)` stay below `1e-12` of their maxima.
    pub fn auto_b_max(w: f64) -> Result<f64> {
        if !(w > 0.0) || !w.is_finite() {
            return Err(NqpError::param(alloc::format!("filter width must be positive, got {w}")));
        }
        let step = 0.01;
        let mut peak0 = f64::NEG_INFINITY;
        let mut peak1 = f64::NEG_INFINITY;
        let mut b = 0.0;
        loop {
            b += step;
            let l = 0.5 * b * b + ln_omega_unit(b / w, 1e-10)?;
            let l1 = l + b.ln();
            peak0 = peak0.max(l);
            peak1 = peak1.max(l1);
            let cut = DECAY.ln();
            if l - peak0 < cut && l1 - peak1 < cut {
                return Ok(b);
            }
            if b > 200.0 * w.max(1.0) {
                return Err(NqpError::numerical("filter cutoff scan did not terminate"));
            }
        }
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn b_max(&self) -> f64 {
        self.b_max
    }

    pub fn n_table(&self) -> usize {
        self.n_table
    }

    /// Normalization `1 / A_w(0)`.
    pub fn normalization(&self) -> f64 {
        1.0 / autocorrelation_at_origin(self.w)
    }

    /// `Omega_w(b)`; zero beyond the cutoff.
    pub fn eval(&self, b: f64) -> f64 {
        let b = b.abs();
        if b == 0.0 {
            return 1.0;
        }
        if !(b <= self.b_max) {
            return 0.0;
        }
        self.ln_table.eval(b).exp().min(1.0)
    }

    /// `Omega_w(b)` straight from quadrature, bypassing the table.
    pub fn eval_direct(&self, b: f64) -> Result<f64> {
        Ok(ln_omega_unit(b.abs() / self.w, 1e-13)?.exp())
    }

    /// `(b, Omega_w(b))` pairs at the table nodes.
    pub fn table(&self) -> Vec<(f64, f64)> {
        let t = &self.ln_table;
        t.f.iter().enumerate().map(|(i, l)| (i as f64 * t.h, l.exp())).collect()
    }
}
