use nqp_core::simulator::{equidistant_phases, sample_ensemble, uniform_counts};
use nqp_core::*;

fn ensemble(model: &StateModel, i1: usize, i2: usize, n: usize, seed: u64) -> PhaseGroupedEnsemble {
    sample_ensemble(model, &equidistant_phases(i1), &equidistant_phases(i2), &uniform_counts(n, i1, i2), seed).unwrap()
}

fn compare(field: &NqpMatrixField, reference: impl Fn(usize, usize, Complex64) -> Estimate) {
    for k in 0..field.grid.len() {
        let alpha = field.grid.point(k);
        for m in 0..field.d {
            for n in m..field.d {
                let want = reference(m, n, alpha);
                let got = field.values[k].get(m, n);
                let tol = 2e-6 * (1.0 + want.sigma * 100.0);
                assert!((got - want.value).norm() < tol, "({m},{n}) at {alpha}: {got} vs {}", want.value);
                let rel = (field.errors[k].get(m, n) - want.sigma).abs() / want.sigma;
                assert!(rel < 5e-3, "sigma ({m},{n}) at {alpha}: {} vs {}", field.errors[k].get(m, n), want.sigma);
            }
        }
    }
}

#[test]
fn lattice_field_matches_direct_sampling() {
    let beta = Complex64::new(1.4, 0.0);
    let model = StateModel::experimental(beta).unwrap();
    let ens = ensemble(&model, 6, 6, 36 * 300, 3);
    let w = compute_weights(&ens).unwrap();
    let cv = CvPatternEvaluator::new(FilterKernel::new(1.9).unwrap()).unwrap();
    let dv = DvPatternEvaluator::new(3).unwrap();
    let grid = PhaseSpaceGrid::new(-3.0, 3.0, -2.0, 2.0, 4, 3).unwrap();
    let corr = PhaseCorrection::bin_average(&ens);
    let field = assemble_field(&ens, &w, &cv, &dv, &grid, 3, corr).unwrap();
    compare(&field, |m, n, a| sample_nqp_element(&ens, &w, &cv, &dv, m, n, a, corr).unwrap());
    let plain = assemble_field(&ens, &w, &cv, &dv, &grid, 2, PhaseCorrection::none()).unwrap();
    compare(&plain, |m, n, a| sample_nqp_element(&ens, &w, &cv, &dv, m, n, a, PhaseCorrection::none()).unwrap());
}

#[test]
fn cv_field_matches_direct_sampling() {
    let ens = ensemble(&StateModel::fock(1), 5, 1, 5 * 400, 8);
    let w = compute_weights(&ens).unwrap();
    let cv = CvPatternEvaluator::new(FilterKernel::new(1.4).unwrap()).unwrap();
    let grid = PhaseSpaceGrid::new(-2.0, 2.0, -2.0, 2.0, 3, 3).unwrap();
    let corr = PhaseCorrection::bin_average(&ens);
    let field = assemble_cv_field(&ens, &w, &cv, &grid, corr).unwrap();
    compare(&field, |_, _, a| sample_cv_quasiprobability(&ens, &w, &cv, a, corr).unwrap());
}

#[test]
fn integrated_kernel_matches_grid_sum() {
    let model = StateModel::product(StateModel::coherent(Complex64::new(0.5, 0.3)).unwrap(), StateModel::fock(1)).unwrap();
    let ens = ensemble(&model, 3, 3, 9 * 200, 5);
    let w = compute_weights(&ens).unwrap();
    let cv = CvPatternEvaluator::new(FilterKernel::new(1.2).unwrap()).unwrap();
    let dv = DvPatternEvaluator::new(2).unwrap();
    let grid = PhaseSpaceGrid::new(-2.0, 2.0, -1.0, 1.5, 5, 4).unwrap();
    let corr = PhaseCorrection::bin_average(&ens);
    let tw = grid.trapezoid_weights();
    for (m, n) in [(0, 0), (0, 1), (1, 1)] {
        let got = integrate_element(&ens, &w, &cv, Some(&dv), &grid, m, n, corr).unwrap();
        let mut want = Complex64::new(0.0, 0.0);
        for (k, &wk) in tw.iter().enumerate() {
            want += wk * sample_nqp_element(&ens, &w, &cv, &dv, m, n, grid.point(k), corr).unwrap().value;
        }
        assert!((got.value - want).norm() < 1e-5 * (1.0 + want.norm()), "({m},{n}) {} vs {want}", got.value);
        assert!(got.sigma > 0.0);
    }
}
