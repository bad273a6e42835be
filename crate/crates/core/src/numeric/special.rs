#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// Exponentially scaled modified Bessel function `exp(-|x|) I0(x)`.
pub fn i0e(x: f64) -> f64 {
    let x = x.abs();
    if x < 20.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Asymptotic series; terms shrink until k ~ 4x, far past convergence here.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let m = 2.0 * k - 1.0;
            term *= m * m / (8.0 * k * x);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Associated Laguerre polynomial `L_n^(a)(t)` by the three-term recurrence in `n`.
pub fn laguerre(n: usize, a: f64, t: f64) -> f64 {
    let mut l0 = 1.0;
    if n == 0 {
        return l0;
    }
    let mut l1 = 1.0 + a - t;
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + a - t) * l1 - (kf + a) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Normalized Hermite functions `chi_0..=chi_nmax` at `x` for the variance-1/2
/// quadrature convention, `chi_0(x) = pi^{-1/4} exp(-x^2/2)`.
pub fn hermite_functions(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if nmax >= 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for k in 1..nmax {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
    out
}

/// Fock matrix element `<m| D(z) |n>` of the displacement operator.
pub fn displacement_element(m: usize, n: usize, z: Complex64) -> Complex64 {
    displacement_element_scaled(m, n, z, 0.0)
}

/// `<m| D(z) |n> e^{s}`, with the exponent folded into the Gaussian factor.
pub fn displacement_element_scaled(m: usize, n: usize, z: Complex64, s: f64) -> Complex64 {
    let r2 = z.norm_sqr();
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let k = hi - lo;
    let pref = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * r2 + s).exp() * laguerre(lo, k as f64, r2);
    let base = if m >= n { z } else { -z.conj() };
    base.powu(k as u32) * pref
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::integrate_adaptive;

    #[test]
    fn i0e_branches_agree_with_integral_form() {
        for &x in &[0.0, 0.3, 2.0, 9.5, 19.99, 20.0, 35.0, 400.0] {
            let v = integrate_adaptive(|t| (x * (t.cos() - 1.0)).exp(), 0.0, PI, 1e-14, 0.0).unwrap() / PI;
            assert!((i0e(x) - v).abs() < 1e-14 * v.max(1e-300) + 1e-16, "x={x} {} {v}", i0e(x));
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let r = crate::numeric::quad::composite_gauss_legendre(-12.0, 12.0, 48, 16);
        let mut g = [[0.0; 6]; 6];
        for (&x, &w) in r.nodes.iter().zip(&r.weights) {
            let h = hermite_functions(5, x);
            for i in 0..6 {
                for j in 0..6 {
                    g[i][j] += w * h[i] * h[j];
                }
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn laguerre_low_orders() {
        let t = 0.7;
        let a = 2.0;
        assert!((laguerre(2, a, t) - (0.5 * t * t - (a + 2.0) * t + 0.5 * (a + 2.0) * (a + 1.0))).abs() < 1e-14);
    }

    #[test]
    fn displacement_matches_coherent_amplitudes() {
        let z = Complex64::new(0.8, -0.3);
        let mut norm = 0.0;
        for m in 0..40 {
            let v = displacement_element(m, 0, z);
            let want = (-0.5 * z.norm_sqr()).exp() * z.powu(m as u32) / ln_factorial(m).exp().sqrt();
            assert!((v - want).norm() < 1e-14);
            norm += v.norm_sqr();
        }
        assert!((norm - 1.0).abs() < 1e-13);
        // Unitarity: D(-z) D(z) = 1 on |1>.
        let s: Complex64 = (0..60).map(|k| displacement_element(1, k, -z) * displacement_element(k, 1, z)).sum();
        assert!((s - 1.0).norm() < 1e-12);
    }
}
