use std::f64::consts::{PI, SQRT_2};

use nqp_core::numeric::quad::composite_gauss_legendre;
use nqp_core::simulator::{equidistant_phases, sample_ensemble, uniform_counts, EnsembleMetadata, Sampler};
use nqp_core::state::{compiled_pdf, joint_pdf};
use nqp_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn catalog() -> Vec<StateModel> {
    vec![
        StateModel::coherent(c(1.4, -0.2)).unwrap(),
        StateModel::fock(2),
        StateModel::spacs(c(0.9, 0.0)).unwrap(),
        StateModel::hybrid_cat(c(1.4, 0.0)).unwrap(),
        StateModel::experimental(c(1.4, 0.0)).unwrap(),
        StateModel::tmsv(0.3).unwrap(),
        StateModel::dephased_tmsv(0.3).unwrap(),
        StateModel::product(StateModel::coherent(c(1.0, 0.5)).unwrap(), StateModel::fock(1)).unwrap(),
        StateModel::experimental(c(1.4, 0.0)).unwrap().apply_loss(0.7).unwrap(),
    ]
}

#[test]
fn joint_densities_are_normalized_per_phase_pair() {
    let rule = composite_gauss_legendre(-9.0, 9.0, 24, 12);
    for model in catalog() {
        let eta_lossy = matches!(model, StateModel::Lossy { .. });
        let r = if eta_lossy { composite_gauss_legendre(-9.0, 9.0, 12, 8) } else { rule.clone() };
        let cs = model.compile().unwrap();
        for &(p1, p2) in &[(0.0, 0.0), (1.1, 2.5)] {
            let mut s = 0.0;
            for (&x1, &w1) in r.nodes.iter().zip(&r.weights) {
                for (&x2, &w2) in r.nodes.iter().zip(&r.weights) {
                    s += w1 * w2 * compiled_pdf(&cs, x1, p1, x2, p2);
                }
            }
            assert!((s - 1.0).abs() < 1e-8, "{}: {s}", model.tag());
        }
    }
}

#[test]
fn single_photon_marginal_and_loss() {
    let rule = composite_gauss_legendre(-9.0, 9.0, 24, 12);
    let marginal = |m: &StateModel, x: f64, phi: f64| -> f64 {
        let cs = m.compile().unwrap();
        rule.nodes.iter().zip(&rule.weights).map(|(&y, &w)| w * compiled_pdf(&cs, x, phi, y, 0.3)).sum()
    };
    let f1 = StateModel::fock(1);
    let lossy = StateModel::fock(1).apply_loss(0.5).unwrap();
    for &x in &[-1.2f64, 0.0, 0.4, 2.0] {
        let p1 = 2.0 * x * x * (-x * x).exp() / PI.sqrt();
        let p0 = (-x * x).exp() / PI.sqrt();
        assert!((marginal(&f1, x, 0.7) - p1).abs() < 1e-12);
        assert!((marginal(&lossy, x, 0.7) - 0.5 * (p0 + p1)).abs() < 1e-10);
    }
    let identity = StateModel::fock(1).apply_loss(1.0).unwrap();
    assert_eq!(identity, StateModel::fock(1));
    let beta = c(1.2, 0.4);
    assert_eq!(StateModel::coherent(beta).unwrap().apply_loss(0.64).unwrap(), StateModel::coherent(beta * 0.8).unwrap());
    assert!(StateModel::fock(1).apply_loss(0.0).is_err());
    assert!(StateModel::fock(1).apply_loss(1.5).is_err());
}

#[test]
fn hybrid_cat_marginal_is_a_balanced_mixture() {
    let beta = c(1.4, 0.0);
    let cat = StateModel::hybrid_cat(beta).unwrap();
    let plus = StateModel::coherent(beta).unwrap();
    let minus = StateModel::coherent(-beta).unwrap();
    let rule = composite_gauss_legendre(-9.0, 9.0, 24, 12);
    for &(x, p1, p2) in &[(0.3, 0.0, 0.0), (-1.0, 1.0, 2.0)] {
        let m: f64 = rule.nodes.iter().zip(&rule.weights).map(|(&y, &w)| w * joint_pdf(&cat, x, p1, y, p2).unwrap()).sum();
        let v = |s: &StateModel| rule.nodes.iter().zip(&rule.weights).map(|(&y, &w)| w * joint_pdf(s, x, p1, y, 0.0).unwrap()).sum::<f64>();
        assert!((m - 0.5 * (v(&plus) + v(&minus))).abs() < 1e-12);
    }
}

fn erf_cdf(x: f64, mu: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x - mu))
}

fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sampled_marginals_pass_kolmogorov_smirnov() {
    // Critical value at the 1e-3 level for n = 1e4.
    let crit = 1.949 / 100.0;
    let beta = c(1.4, 0.6);
    let model = StateModel::product(StateModel::coherent(beta).unwrap(), StateModel::fock(1)).unwrap();
    let s = Sampler::new(&model).unwrap();
    let phi = 0.8;
    let table = s.marginal_table(phi).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (x1, x2) = s.sample_cell(&table, phi, 0.4, 10_000, &mut rng);
    let mu = SQRT_2 * (beta * Complex64::from_polar(1.0, -phi)).re;
    assert!(ks(x1, |x| erf_cdf(x, mu)) < crit);
    let fock_cdf = |x: f64| 0.5 * (1.0 + libm::erf(x)) - x * (-x * x).exp() / PI.sqrt();
    assert!(ks(x2, fock_cdf) < crit);
}

#[test]
fn coherent_mean_matches_analytic_moment() {
    let beta = c(1.4, 0.0);
    let model = StateModel::product(StateModel::coherent(beta).unwrap(), StateModel::vacuum()).unwrap();
    let e = sample_ensemble(&model, &equidistant_phases(6), &equidistant_phases(6), &uniform_counts(372_000, 6, 6), 7).unwrap();
    assert_eq!(e.num_groups(), 36);
    assert_eq!(e.total(), 372_000);
    assert!(e.is_equidistant());
    let xs: Vec<f64> = e.groups().iter().filter(|g| g.phi_cv == 0.0).flat_map(|g| g.x_cv.iter().copied()).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    // Quadrature variance 1/2.
    let se = (0.5 / n).sqrt();
    assert!((mean - SQRT_2 * 1.4).abs() < 3.0 * se, "{mean}");
}

#[test]
fn experimental_metadata_reports_gain_and_transmission() {
    let m = EnsembleMetadata::for_model(&StateModel::experimental(c(1.4, 0.0)).unwrap(), 7).unwrap();
    let g = (1.0 + (1.0f64 + 4.0 / 1.96).sqrt()) / 2.0;
    assert!((m.gain.unwrap() - g).abs() < 1e-15);
    assert!((m.gain.unwrap() - 1.372).abs() < 1e-3);
    assert!((m.transmission.unwrap() - 1.0 / 3.96f64.sqrt()).abs() < 1e-15);
    assert!((m.transmission.unwrap() - 0.5025).abs() < 1e-4);
}

#[test]
fn truncation_limit_is_reported() {
    assert!(StateModel::dephased_tmsv(0.9999).is_err());
    assert!(StateModel::tmsv(1.0).is_err());
}
