#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::matrix::CMatrix;

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unit eigenvectors.
/// Equal eigenvalues keep the order in which the sweep produced them, so the
/// output is deterministic. Each vector is rephased so its first component of
/// non-negligible modulus is real and positive.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let d = m.d;
    let mut a = m.clone();
    let mut v = CMatrix::from_fn(d, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    let scale: f64 = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..d {
                for q in p + 1..d {
                    off += a.get(p, q).norm_sqr();
                }
            }
            if off.sqrt() <= 1e-17 * scale {
                break;
            }
            for p in 0..d {
                for q in p + 1..d {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(core::cmp::Ordering::Equal).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<Complex64> = (0..d).map(|i| v.get(i, k)).collect();
            let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let lead = col.iter().copied().find(|z| z.norm() > 1e-12 * norm).unwrap_or(Complex64::new(1.0, 0.0));
            let phase = lead.conj() / lead.norm() / norm;
            for z in &mut col {
                *z *= phase;
            }
            col
        })
        .collect();
    (values, vectors)
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let e = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // U = diag(1, conj(e)) * [[c, s], [-s, c]]
    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = -e.conj() * s;
    let uqq = e.conj() * c;
    let d = a.d;
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * upp + akq * uqp);
        a.set(k, q, akp * upq + akq * uqq);
    }
    for k in 0..d {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, upp.conj() * apk + uqp.conj() * aqk);
        a.set(q, k, upq.conj() * apk + uqq.conj() * aqk);
    }
    a.set(p, q, Complex64::new(0.0, 0.0));
    a.set(q, p, Complex64::new(0.0, 0.0));
    a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
    a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));
    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * upp + vkq * uqp);
        v.set(k, q, vkp * upq + vkq * uqq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_by_two_closed_form() {
        let z = c(0.3, -0.4);
        let m = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => z,
            (1, 0) => z.conj(),
            _ => c(0.0, 0.0),
        });
        let (e, v) = hermitian_eigen(&m);
        assert!((e[0] + 0.5).abs() < 1e-15);
        let s = 0.5f64.sqrt();
        assert!((v[0][0] - c(s, 0.0)).norm() < 1e-15);
        assert!((v[0][1] + z.conj() / z.norm() * s).norm() < 1e-15);
        let mv1 = z.conj() * v[0][0];
        assert!((mv1 - e[0] * v[0][1]).norm() < 1e-15);
    }

    #[test]
    fn reconstructs_matrix() {
        let m = CMatrix::from_fn(4, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.1 * (a + b) } else if i > j { -0.1 * (a + b) } else { 0.0 };
            c(1.0 / (1.0 + a + b) + if i == j { a } else { 0.0 }, im)
        });
        let (e, v) = hermitian_eigen(&m);
        for i in 0..4 {
            for j in 0..4 {
                let s: Complex64 = (0..4).map(|k| v[k][i] * e[k] * v[k][j].conj()).sum();
                assert!((s - m.get(i, j)).norm() < 1e-13);
            }
        }
        assert!(e.windows(2).all(|w| w[0] <= w[1]));
    }
}
