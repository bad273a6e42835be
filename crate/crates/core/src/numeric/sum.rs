use num_complex::Complex64;

/// Pairwise (tree) summation with a fixed split rule, so results depend only on
/// the order of the input.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_complex(v: &[Complex64]) -> Complex64 {
    if v.len() <= 8 {
        let mut s = Complex64::new(0.0, 0.0);
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum_complex(&v[..mid]) + pairwise_sum_complex(&v[mid..])
}
