//! Fock-basis pattern functions `F_{k,l}(x, phi) = f_{k,l}(x) e^{i(k-l) phi}`.
//!
//! With `m = |k - l|`, `lo = min(k, l)` and `y = sqrt(2) x`, the radial part is
//! real and symmetric in `(k, l)`:
//! `f_{k,l}(y) = (-1)^{floor(m/2)} sqrt(lo!/(lo+m)!) 2 int_0^inf u^{m+1} e^{-u^2/2} L_lo^{(m)}(u^2) T_m(u y) du`
//! where `T_m` is `cos` for even `m` and `sin` for odd `m`.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use num_complex::Complex64;

use crate::error::{NqpError, Result};
use crate::numeric::interp::QuinticTable;
use crate::numeric::quad::composite_gauss_legendre;
use crate::numeric::special::{laguerre, ln_factorial, sinc};

pub const DEFAULT_D: usize = 3;
pub const MAX_D: usize = 10;
const U_MAX: f64 = 12.0;
const X_RANGE: f64 = 10.0;
const X_STEP: f64 = 0.01;

#[derive(Clone, Debug)]
struct Radial {
    odd: bool,
    u: Vec<f64>,
    c: Vec<f64>,
    table: QuinticTable,
}

impl Radial {
    fn direct(&self, x: f64) -> f64 {
        let y = SQRT_2 * x;
        let trig = if self.odd { f64::sin } else { f64::cos };
        self.u.iter().zip(&self.c).map(|(&u, &c)| c * trig(u * y)).sum()
    }

    fn eval(&self, x: f64) -> f64 {
        self.table.eval(x).unwrap_or_else(|| self.direct(x))
    }
}

#[derive(Clone, Debug)]
pub struct DvPatternEvaluator {
    d: usize,
    /// Upper-triangle radial functions, index `k * d + l` for `k <= l`.
    radial: Vec<Option<Radial>>,
}

impl DvPatternEvaluator {
    /// Evaluator for matrix indices `0..d`. Dimensions above 3 are numerically
    /// valid but the highest elements carry large sampling errors.
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > MAX_D {
            return Err(NqpError::param(alloc::format!("d must be in 1..={MAX_D}, got {d}")));
        }
        let rule = composite_gauss_legendre(0.0, U_MAX, 48, 16);
        let mut radial = alloc::vec![None; d * d];
        let n_x = (2.0 * X_RANGE / X_STEP).round() as usize + 1;
        for k in 0..d {
            for l in k..d {
                let m = l - k;
                let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                let norm = (0.5 * (ln_factorial(k) - ln_factorial(l))).exp();
                let c: Vec<f64> = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &w)| {
                        sign * norm * 2.0 * w * u.powi(m as i32 + 1) * (-0.5 * u * u).exp() * laguerre(k, m as f64, u * u)
                    })
                    .collect();
                let odd = m % 2 == 1;
                let mut f = Vec::with_capacity(n_x);
                let mut d1 = Vec::with_capacity(n_x);
                let mut d2 = Vec::with_capacity(n_x);
                for i in 0..n_x {
                    let y = SQRT_2 * (-X_RANGE + i as f64 * X_STEP);
                    let (mut v0, mut v1, mut v2) = (0.0, 0.0, 0.0);
                    for (&u, &ci) in rule.nodes.iter().zip(&c) {
                        let (sn, cs) = (u * y).sin_cos();
                        let (t0, t1) = if odd { (sn, cs) } else { (cs, -sn) };
                        v0 += ci * t0;
                        v1 += ci * u * t1;
                        v2 -= ci * u * u * t0;
                    }
                    f.push(v0);
                    d1.push(SQRT_2 * v1);
                    d2.push(2.0 * v2);
                }
                let table = QuinticTable { x0: -X_RANGE, h: X_STEP, f, d1, d2 };
                radial[k * d + l] = Some(Radial { odd, u: rule.nodes.clone(), c, table });
            }
        }
        Ok(DvPatternEvaluator { d, radial })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn radial(&self, k: usize, l: usize) -> Result<&Radial> {
        if k >= self.d || l >= self.d {
            return Err(NqpError::param(alloc::format!("index ({k}, {l}) out of range for d = {}", self.d)));
        }
        let (a, b) = if k <= l { (k, l) } else { (l, k) };
        Ok(self.radial[a * self.d + b].as_ref().expect("upper triangle filled"))
    }

    /// Real radial value `f_{k,l}(x)`.
    pub fn radial_value(&self, k: usize, l: usize, x: f64) -> Result<f64> {
        Ok(self.radial(k, l)?.eval(x))
    }

    /// Radial value by direct summation, bypassing the table.
    pub fn radial_direct(&self, k: usize, l: usize, x: f64) -> Result<f64> {
        Ok(self.radial(k, l)?.direct(x))
    }

    /// `f_{k,l}(x)` as a complex number (its imaginary part is zero).
    pub fn dv_radial_pattern(&self, k: usize, l: usize, x: f64) -> Result<Complex64> {
        Ok(Complex64::new(self.radial_value(k, l, x)?, 0.0))
    }

    /// `F_{m,n}(x, phi)`.
    pub fn dv_pattern(&self, m: usize, n: usize, x: f64, phi: f64) -> Result<Complex64> {
        let r = self.radial_value(m, n, x)?;
        Ok(Complex64::from_polar(r, (m as f64 - n as f64) * phi))
    }

    /// Bin average of `F_{m,n}` over a phase bin of width `pi / bins` centred on `phi_k`.
    pub fn dv_pattern_phase_averaged(&self, m: usize, n: usize, x: f64, phi_k: f64, bins: usize) -> Result<Complex64> {
        Ok(self.dv_pattern(m, n, x, phi_k)? * bin_factor(m, n, bins))
    }
}

/// Average of `e^{i(m-n) phi}` over a bin of width `pi / bins` relative to its centre.
pub fn bin_factor(m: usize, n: usize, bins: usize) -> f64 {
    if bins == 0 {
        return 1.0;
    }
    sinc((m as f64 - n as f64) * PI / (2.0 * bins as f64))
}


#[cfg(test)]
mod expectation_tests {
    use super::*;
    use crate::numeric::quad::composite_gauss_legendre;
    use crate::state::StateModel;

    /// Exact `(1/pi) int dphi int dx p(x; phi) F_{m,n}(x, phi)` for a single-mode state.
    fn expectation(model: &StateModel, ev: &DvPatternEvaluator, m: usize, n: usize) -> Complex64 {
        let c = model.compile().unwrap();
        let r = composite_gauss_legendre(-9.0, 9.0, 72, 16);
        let phases = 16;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..phases {
            let phi = PI * k as f64 / phases as f64;
            for (&x, &w) in r.nodes.iter().zip(&r.weights) {
                acc += w * c.pure_pdf(x, phi, 0.0, 0.0) * (PI.sqrt()) * ev.dv_pattern(m, n, x, phi).unwrap();
            }
        }
        acc / phases as f64
    }

    #[test]
    fn reproduces_coherent_density_matrix() {
        let ev = DvPatternEvaluator::new(3).unwrap();
        let beta = Complex64::new(0.7, -0.4);
        let model = StateModel::coherent(beta).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let got = expectation(&model, &ev, m, n);
                let a = crate::numeric::special::displacement_element(m, 0, beta);
                let b = crate::numeric::special::displacement_element(n, 0, beta);
                let want = a * b.conj();
                assert!((got - want).norm() < 1e-9, "({m},{n}) {got} {want}");
            }
        }
    }

    #[test]
    fn reproduces_fock_populations() {
        let ev = DvPatternEvaluator::new(3).unwrap();
        let got = expectation(&StateModel::fock(1), &ev, 1, 1);
        assert!((got.re - 1.0).abs() < 1e-9);
        let got = expectation(&StateModel::fock(1), &ev, 0, 0);
        assert!(got.norm() < 1e-9);
    }
}
