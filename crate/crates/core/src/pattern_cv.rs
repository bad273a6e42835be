//! Filtered CV pattern function.
//!
//! With `s = sqrt(2) x - 2 Re(alpha e^{-i phi})`,
//! `f(x, phi; alpha) = f0(s)` and
//! `f0(s) = (2/pi) int_0^{b_max} b exp(b^2/2) Omega_w(b) cos(b s) db`.
//! The `sqrt(2)` maps data in the variance-1/2 convention onto the variance-1
//! variable in which the pattern integral is written.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_PI, PI, SQRT_2};
use num_complex::Complex64;

use crate::error::Result;
use crate::filter::FilterKernel;
use crate::numeric::interp::QuinticTable;
use crate::numeric::quad::{composite_gauss_legendre, GaussLegendreCache, Rule};

/// Lattice spacing of the tabulated `f0`, in units of `s`.
pub const TABLE_STEP: f64 = 0.01;
/// Default half-range of the tabulated `f0`.
pub const DEFAULT_TABLE_RANGE: f64 = 40.0;
const PANEL_WIDTH: f64 = 0.25;
const PANEL_ORDER: usize = 16;

#[derive(Clone, Debug)]
pub struct CvPatternEvaluator {
    kernel: FilterKernel,
    b_nodes: Vec<f64>,
    /// `(2/pi) * quadrature weight * g(b)` at each node.
    b_weights: Vec<f64>,
    table: QuinticTable,
    bound: f64,
}

/// Shift of the pattern argument, `2 Re(alpha e^{-i phi})`.
#[inline]
pub fn shift(phi: f64, alpha: Complex64) -> f64 {
    2.0 * (alpha.re * phi.cos() + alpha.im * phi.sin())
}

impl CvPatternEvaluator {
    pub fn new(kernel: FilterKernel) -> Result<Self> {
        Self::with_range(kernel, DEFAULT_TABLE_RANGE)
    }

    /// Evaluator whose table covers `|s| <= range`; values outside fall back to
    /// direct summation.
    pub fn with_range(kernel: FilterKernel, range: f64) -> Result<Self> {
        let b_max = kernel.b_max();
        let panels = (b_max / PANEL_WIDTH).ceil().max(1.0) as usize;
        let rule: Rule = composite_gauss_legendre(0.0, b_max, panels, PANEL_ORDER);
        let b_weights: Vec<f64> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&b, &w)| 2.0 * FRAC_1_PI * w * b * (0.5 * b * b).exp() * kernel.eval(b))
            .collect();
        let bound = b_weights.iter().sum::<f64>();
        let n = (range / TABLE_STEP).ceil() as usize + 1;
        let mut f = Vec::with_capacity(n);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for k in 0..n {
            let s = k as f64 * TABLE_STEP;
            let (mut v0, mut v1, mut v2) = (0.0, 0.0, 0.0);
            for (&b, &c) in rule.nodes.iter().zip(&b_weights) {
                let (sn, cs) = (b * s).sin_cos();
                v0 += c * cs;
                v1 -= c * b * sn;
                v2 -= c * b * b * cs;
            }
            f.push(v0);
            d1.push(v1);
            d2.push(v2);
        }
        let table = QuinticTable { x0: 0.0, h: TABLE_STEP, f, d1, d2 };
        Ok(CvPatternEvaluator { kernel, b_nodes: rule.nodes, b_weights, table, bound })
    }

    pub fn kernel(&self) -> &FilterKernel {
        &self.kernel
    }

    pub fn w(&self) -> f64 {
        self.kernel.w()
    }

    /// Upper bound `(2/pi) int b e^{b^2/2} Omega(b) db = f0(0)` on `|f|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `f0` at the lattice nodes `k * TABLE_STEP`, `k >= 0`.
    pub fn lattice(&self) -> &[f64] {
        &self.table.f
    }

    pub fn table_range(&self) -> f64 {
        self.table.x_max()
    }

    /// `f0(s)` by direct summation over the b-rule.
    pub fn f0_direct(&self, s: f64) -> f64 {
        self.b_nodes.iter().zip(&self.b_weights).map(|(&b, &c)| c * (b * s).cos()).sum()
    }

    /// `f0(s)` from the table, or by direct summation outside it.
    #[inline]
    pub fn f0(&self, s: f64) -> f64 {
        match self.table.eval(s.abs()) {
            Some(v) => v,
            None => self.f0_direct(s),
        }
    }

    /// `f(x, phi; alpha)` for a quadrature `x` in data units.
    #[inline]
    pub fn cv_pattern(&self, x: f64, phi: f64, alpha: Complex64) -> f64 {
        self.f0(SQRT_2 * x - shift(phi, alpha))
    }

    /// Number of Gauss-Legendre nodes for the bin average at amplitude `r`
    /// with `bins` phases.
    pub fn bin_nodes(&self, r: f64, bins: usize) -> usize {
        if r == 0.0 || bins == 0 {
            return 1;
        }
        let excursion = self.kernel.b_max() * 2.0 * r * PI / bins as f64;
        ((0.5 * excursion).ceil() as usize + 16).min(256)
    }

    /// Average of `f` over the phase bin of width `pi / bins` centred on `phi_k`.
    pub fn cv_pattern_phase_averaged(&self, x: f64, phi_k: f64, bins: usize, alpha: Complex64) -> f64 {
        let n = self.bin_nodes(alpha.norm(), bins);
        if n == 1 {
            return self.cv_pattern(x, phi_k, alpha);
        }
        let mut cache = GaussLegendreCache::new();
        cache.ensure(n);
        self.bin_average_with(cache.get(n), x, phi_k, bins, alpha)
    }

    pub(crate) fn bin_average_with(&self, rule: &Rule, x: f64, phi_k: f64, bins: usize, alpha: Complex64) -> f64 {
        let h = 0.5 * PI / bins as f64;
        let s = SQRT_2 * x;
        let mut acc = 0.0;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc += w * self.f0(s - shift(phi_k + h * t, alpha));
        }
        0.5 * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::integrate_adaptive;

    fn ev() -> CvPatternEvaluator {
        CvPatternEvaluator::new(FilterKernel::new(1.9).unwrap()).unwrap()
    }

    #[test]
    fn origin_value() {
        let e = ev();
        // Adaptive quadrature of the defining integral with the filter from the
        // two-dimensional autocorrelation, computed independently.
        assert!((e.f0(0.0) - 519.7988857305119).abs() < 1e-6 * 519.8);
        assert!((e.f0(1.7) - (-116.76663256130128)).abs() < 1e-6 * 519.8);
    }

    #[test]
    fn table_matches_adaptive_quadrature() {
        let e = ev();
        let k = e.kernel().clone();
        for s in [0.37, 3.1, 11.2] {
            let want = integrate_adaptive(
                |b| 2.0 / PI * b * (0.5 * b * b).exp() * k.eval_direct(b).unwrap() * (b * s).cos(),
                0.0,
                k.b_max(),
                1e-11,
                1e-9,
            )
            .unwrap();
            assert!((e.f0(s) - want).abs() < 1e-6 * e.bound(), "{s}");
        }
    }
}
