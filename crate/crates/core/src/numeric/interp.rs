#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

/// Four-point Lagrange weights for nodes at -1, 0, 1, 2 evaluated at `t` in [0, 1).
#[inline]
pub fn cubic_weights(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}

/// Cubic Hermite basis on [0, 1]: value and slope at both ends.
#[inline]
pub fn cubic_hermite(t: f64, f0: f64, d0: f64, f1: f64, d1: f64, h: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * h * d1
}

/// Samples of a smooth function with first and second derivatives on a uniform
/// lattice, evaluated by quintic Hermite interpolation.
#[derive(Clone, Debug)]
pub struct QuinticTable {
    pub x0: f64,
    pub h: f64,
    pub f: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl QuinticTable {
    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.f.len() - 1) as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x0 && x <= self.x_max()
    }

    /// Interpolated value; `None` outside the lattice.
    #[inline]
    pub fn eval(&self, x: f64) -> Option<f64> {
        let u = (x - self.x0) / self.h;
        if !(u >= 0.0) {
            return None;
        }
        let last = self.f.len() - 1;
        let mut i = u.floor() as usize;
        if i >= last {
            if u > last as f64 {
                return None;
            }
            i = last - 1;
        }
        let t = u - i as f64;
        let h = self.h;
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        Some(
            self.f[i] * h0
                + h * self.d1[i] * h1
                + h * h * self.d2[i] * h2
                + self.f[i + 1] * h3
                + h * self.d1[i + 1] * h4
                + h * h * self.d2[i + 1] * h5,
        )
    }
}

/// Uniform samples evaluated by four-point cubic Lagrange interpolation,
/// clamped to the end cells.
#[derive(Clone, Debug)]
pub struct CubicTable {
    pub x0: f64,
    pub h: f64,
    pub f: Vec<f64>,
}

impl CubicTable {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.f.len();
        let u = ((x - self.x0) / self.h).max(0.0);
        let i = (u.floor() as usize).clamp(1, n - 3);
        let t = u - i as f64;
        let w = cubic_weights(t);
        w[0] * self.f[i - 1] + w[1] * self.f[i] + w[2] * self.f[i + 1] + w[3] * self.f[i + 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_smooth_function() {
        let h = 0.05;
        let n = 201;
        let xs: Vec<f64> = (0..n).map(|i| -5.0 + h * i as f64).collect();
        let t = QuinticTable {
            x0: -5.0,
            h,
            f: xs.iter().map(|x| x.sin()).collect(),
            d1: xs.iter().map(|x| x.cos()).collect(),
            d2: xs.iter().map(|x| -x.sin()).collect(),
        };
        for k in 0..997 {
            let x = -5.0 + 10.0 * k as f64 / 996.0;
            assert!((t.eval(x).unwrap() - x.sin()).abs() < 1e-11);
        }
        assert!(t.eval(5.0 + 1e-9).is_none());
        assert!(t.eval(-5.0 - 1e-9).is_none());
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        for k in 0..10 {
            let t = k as f64 / 10.0;
            let w = cubic_weights(t);
            let v = w[0] * p(-1.0) + w[1] * p(0.0) + w[2] * p(1.0) + w[3] * p(2.0);
            assert!((v - p(t)).abs() < 1e-13);
        }
    }
}
