use nqp_core::numeric::quad::integrate_adaptive;
use nqp_core::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(2/pi) int_0^inf b Phi(b) Omega(b) J0-free` radial value at the origin for
/// phase-insensitive states.
fn radial_origin(kernel: &FilterKernel, phi: impl Fn(f64) -> f64) -> f64 {
    2.0 / PI * integrate_adaptive(|b| b * phi(b) * kernel.eval(b), 0.0, kernel.b_max(), 1e-12, 0.0).unwrap()
}

#[test]
fn coherent_product_is_a_positive_peak() {
    let k = FilterKernel::new(1.9).unwrap();
    let beta = c(1.4, 0.0);
    let model = StateModel::product(StateModel::coherent(beta).unwrap(), StateModel::vacuum()).unwrap();
    let at_peak = nqp_matrix_analytic(&model, beta, &k, 2).unwrap();
    let want = radial_origin(&k, |_| 1.0);
    assert!((at_peak.get(0, 0).re - want).abs() < 1e-6 * want);
    for (i, j) in [(0, 1), (1, 0), (1, 1)] {
        assert!(at_peak.get(i, j).norm() < 1e-12);
    }
    // Shift covariance: value at alpha equals the vacuum-centred value at alpha - beta.
    let vac = StateModel::vacuum();
    let a = c(0.7, -0.9);
    let p1 = nqp_matrix_analytic(&model, a, &k, 1).unwrap().get(0, 0).re;
    let p2 = nqp_matrix_analytic(&vac, a - beta, &k, 1).unwrap().get(0, 0).re;
    assert!((p1 - p2).abs() < 1e-9 * want);
}

#[test]
fn single_photon_negative_at_origin() {
    for w in [1.0, 1.9, 3.0] {
        let k = FilterKernel::new(w).unwrap();
        let want = radial_origin(&k, |b| 1.0 - b * b);
        assert!(want < 0.0);
        let got = nqp_matrix_analytic(&StateModel::fock(1), c(0.0, 0.0), &k, 1).unwrap().get(0, 0).re;
        assert!((got - want).abs() < 1e-6 * want.abs(), "w={w}: {got} vs {want}");
    }
    let k = FilterKernel::new(1.9).unwrap();
    let p = nqp_matrix_analytic(&StateModel::fock(1), c(0.0, 0.0), &k, 1).unwrap().get(0, 0).re;
    assert!((p + 4.426324499646339).abs() < 1e-6);
}

#[test]
fn hybrid_cat_off_diagonal_and_not_psd() {
    let k = FilterKernel::new(1.9).unwrap();
    let model = StateModel::hybrid_cat(c(1.4, 0.0)).unwrap();
    let grid = PhaseSpaceGrid::new(-3.0, 3.0, -3.0, 3.0, 25, 25).unwrap();
    let f = nqp_field(&model, &k, &grid, 2).unwrap();
    let off = f.values.iter().map(|m| m.get(0, 1).norm()).fold(0.0, f64::max);
    assert!(off > 1e-2);
    let min_e = f.values.iter().map(|m| min_eigenpair(m).unwrap().0).fold(f64::INFINITY, f64::min);
    assert!(min_e < 0.0);
    // Interference with psi = (1, 1)/sqrt(2) differs from the diagonal average by Re P_01.
    let psi = ProjectionVector::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let cond = conditional_distribution(&f, &psi).unwrap();
    for (m, (v, _)) in f.values.iter().zip(cond) {
        let want = 0.5 * (m.get(0, 0).re + m.get(1, 1).re) + m.get(0, 1).re;
        assert!((v - want).abs() < 1e-12);
    }
}

#[test]
fn trace_over_grid_is_one() {
    let k = FilterKernel::new(1.9).unwrap();
    let grid = PhaseSpaceGrid::default();
    let cases: Vec<(StateModel, usize)> = vec![
        (StateModel::product(StateModel::coherent(c(1.4, 0.0)).unwrap(), StateModel::vacuum()).unwrap(), 1),
        (StateModel::experimental(c(1.4, 0.0)).unwrap(), 2),
        (StateModel::hybrid_cat(c(1.4, 0.0)).unwrap(), 2),
        (StateModel::spacs(c(0.9, 0.0)).unwrap(), 1),
        (StateModel::dephased_tmsv(0.5).unwrap(), 24),
        (StateModel::experimental(c(1.4, 0.0)).unwrap().apply_loss(0.8).unwrap(), 3),
    ];
    for (model, d) in cases {
        let f = nqp_field(&model, &k, &grid, d).unwrap();
        let tr: f64 = (0..d).map(|n| f.integrate_diagonal(n)).sum();
        assert!((tr - 1.0).abs() < 1e-4, "{}: {tr}", model.tag());
    }
}

#[test]
fn wide_filter_vacuum_peak_keeps_unit_integral() {
    let grid = PhaseSpaceGrid::new(-4.0, 4.0, -4.0, 4.0, 161, 161).unwrap();
    let mut peaks = Vec::new();
    for w in [2.0, 4.0, 8.0] {
        let k = FilterKernel::new(w).unwrap();
        let f = nqp_field(&StateModel::vacuum(), &k, &grid, 1).unwrap();
        assert!((f.integrate_diagonal(0) - 1.0).abs() < 1e-4, "w={w}");
        peaks.push(f.values[grid.len() / 2].get(0, 0).re);
    }
    assert!(peaks[0] < peaks[1] && peaks[1] < peaks[2]);
}

#[test]
fn fig_s3_orderings() {
    let k = FilterKernel::new(1.9).unwrap();
    let rows = fig_s3_comparison(&[0.0, 0.9, 2.6], &k, &PhaseSpaceGrid::default()).unwrap();
    assert!(rows[0].min_w < 0.0 && rows[0].min_p < 0.0);
    assert_eq!(rows[0].argmin_w, c(0.0, 0.0));
    assert_eq!(rows[0].argmin_p, c(0.0, 0.0));
    assert!(rows[0].ratio_w() > rows[1].ratio_w() && rows[1].ratio_w() > rows[2].ratio_w());
    assert!(rows[0].ratio_p() > rows[1].ratio_p() && rows[1].ratio_p() > rows[2].ratio_p());
    assert!(rows[2].ratio_p() > rows[2].ratio_w());
}

