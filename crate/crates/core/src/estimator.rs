//! Weighted sampling of NQP-matrix elements from phase-grouped data.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::ensemble::{PhaseGroup, PhaseGroupedEnsemble};
use crate::error::{NqpError, Result};
use crate::numeric::quad::GaussLegendreCache;
use crate::numeric::sum::{pairwise_sum, pairwise_sum_complex};
use crate::pattern_cv::CvPatternEvaluator;
use crate::pattern_dv::{bin_factor, DvPatternEvaluator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    Equidistant,
    GeneralInterval,
}

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::Equidistant => "equidistant",
            WeightScheme::GeneralInterval => "general-interval",
        }
    }
}

/// Per-group sampling weights.
///
/// `fractions[l] = N_l * weights[l]` is the share of group `l` in the estimate;
/// the shares sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightAssignment {
    pub scheme: WeightScheme,
    pub weights: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl WeightAssignment {
    /// `sum_l N_l w_l`.
    pub fn total(&self, ensemble: &PhaseGroupedEnsemble) -> f64 {
        ensemble.groups().iter().zip(&self.weights).map(|(g, w)| g.len() as f64 * w).sum()
    }

    /// Weights `1/N` for every sample, ignoring the phase distribution.
    pub fn unweighted(ensemble: &PhaseGroupedEnsemble) -> Self {
        let n = ensemble.total();
        WeightAssignment {
            scheme: WeightScheme::Equidistant,
            weights: ensemble.groups().iter().map(|_| 1.0 / n as f64).collect(),
            fractions: ensemble.groups().iter().map(|g| g.len() as f64 / n as f64).collect(),
        }
    }
}

/// Interval fraction `(phi_next - phi) / pi` of each distinct phase, wrapping
/// the last interval around to the first phase plus pi.
fn interval_fractions(phases: &[f64]) -> Result<Vec<f64>> {
    let n = phases.len();
    (0..n)
        .map(|k| {
            let next = if k + 1 < n { phases[k + 1] } else { phases[0] + PI };
            let width = next - phases[k];
            if !(width > 1e-12) {
                return Err(NqpError::data(alloc::format!("zero-width phase interval at {}", phases[k])));
            }
            Ok(width / PI)
        })
        .collect()
}

fn index_of(phases: &[f64], p: f64) -> usize {
    phases.iter().position(|&q| q == p).expect("phase listed in ensemble")
}

pub fn compute_weights(ensemble: &PhaseGroupedEnsemble) -> Result<WeightAssignment> {
    let groups = ensemble.groups();
    if groups.iter().any(PhaseGroup::is_empty) {
        return Err(NqpError::data("phase group with N_l = 0"));
    }
    let i = groups.len() as f64;
    if ensemble.is_equidistant() {
        return Ok(WeightAssignment {
            scheme: WeightScheme::Equidistant,
            weights: groups.iter().map(|g| 1.0 / (g.len() as f64 * i)).collect(),
            fractions: groups.iter().map(|_| 1.0 / i).collect(),
        });
    }
    let fc = interval_fractions(ensemble.phases_cv())?;
    let fd = interval_fractions(ensemble.phases_dv())?;
    let raw: Vec<f64> = groups
        .iter()
        .map(|g| fc[index_of(ensemble.phases_cv(), g.phi_cv)] * fd[index_of(ensemble.phases_dv(), g.phi_dv)])
        .collect();
    // Equals one for a complete phase grid; renormalizing covers incomplete grids.
    let total: f64 = raw.iter().sum();
    let fractions: Vec<f64> = raw.iter().map(|r| r / total).collect();
    Ok(WeightAssignment {
        scheme: WeightScheme::GeneralInterval,
        weights: groups.iter().zip(&fractions).map(|(g, f)| f / g.len() as f64).collect(),
        fractions,
    })
}

/// Phase-bin averaging of the pattern functions, per mode. `Some(I)` averages
/// over bins of width `pi / I`.
///
/// The default applies none: with data recorded at exactly the listed phases
/// the plain pattern functions are unbiased, while bin averaging suits data
/// whose phases spread over each bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PhaseCorrection {
    pub cv_bins: Option<usize>,
    pub dv_bins: Option<usize>,
}

impl PhaseCorrection {
    pub fn none() -> Self {
        PhaseCorrection::default()
    }

    /// Bin averaging with each mode's own phase count, enabled only for
    /// equidistant ensembles.
    pub fn bin_average(ensemble: &PhaseGroupedEnsemble) -> Self {
        if ensemble.is_equidistant() {
            PhaseCorrection { cv_bins: Some(ensemble.phases_cv().len()), dv_bins: Some(ensemble.phases_dv().len()) }
        } else {
            PhaseCorrection::none()
        }
    }
}

/// Estimate with its propagated standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub sigma: f64,
}

fn check(ensemble: &PhaseGroupedEnsemble, weights: &WeightAssignment) -> Result<()> {
    if weights.weights.len() != ensemble.num_groups() {
        return Err(NqpError::param("weights do not match the ensemble"));
    }
    if let Some(g) = ensemble.groups().iter().find(|g| g.len() < 2) {
        return Err(NqpError::data(alloc::format!("group ({}, {}) has fewer than 2 samples", g.phi_cv, g.phi_dv)));
    }
    Ok(())
}

/// `sum_l sum_j w_l g(x_j)` over the ensemble with per-group pairwise sums,
/// groups taken in ascending phase order, and the propagated error.
pub fn sample_kernel(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    mut kernel: impl FnMut(&PhaseGroup, f64, f64) -> Complex64,
) -> Result<Estimate> {
    check(ensemble, weights)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut var = 0.0;
    let mut g_buf: Vec<Complex64> = Vec::new();
    let mut sq_buf: Vec<f64> = Vec::new();
    for ((group, &w), &f) in ensemble.groups().iter().zip(&weights.weights).zip(&weights.fractions) {
        g_buf.clear();
        sq_buf.clear();
        for (&x1, &x2) in group.x_cv.iter().zip(&group.x_dv) {
            let g = kernel(group, x1, x2);
            g_buf.push(g);
            sq_buf.push(g.norm_sqr());
        }
        let n = group.len() as f64;
        let sum = pairwise_sum_complex(&g_buf);
        let mean = sum / n;
        let mean_sq = pairwise_sum(&sq_buf) / n;
        var += f * f * (mean_sq - mean.norm_sqr()).max(0.0) / n;
        for g in &mut g_buf {
            *g *= w;
        }
        value += pairwise_sum_complex(&g_buf);
    }
    Ok(Estimate { value, sigma: var.sqrt() })
}

/// Unweighted sample mean `(1/N) sum_j g_j`, in the same summation order as
/// [`sample_kernel`].
pub fn unweighted_mean(
    ensemble: &PhaseGroupedEnsemble,
    kernel: impl FnMut(&PhaseGroup, f64, f64) -> Complex64,
) -> Result<Estimate> {
    sample_kernel(ensemble, &WeightAssignment::unweighted(ensemble), kernel)
}

/// Bin-averaged CV pattern function with a prepared Gauss-Legendre cache.
pub(crate) struct CvKernel<'a> {
    cv: &'a CvPatternEvaluator,
    bins: Option<usize>,
    alpha: Complex64,
    nodes: usize,
    cache: GaussLegendreCache,
}

impl<'a> CvKernel<'a> {
    pub(crate) fn new(cv: &'a CvPatternEvaluator, bins: Option<usize>, alpha: Complex64) -> Self {
        let nodes = bins.map_or(1, |b| cv.bin_nodes(alpha.norm(), b));
        let mut cache = GaussLegendreCache::new();
        cache.ensure(nodes);
        CvKernel { cv, bins, alpha, nodes, cache }
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, phi: f64) -> f64 {
        match self.bins {
            Some(b) if self.nodes > 1 => self.cv.bin_average_with(self.cache.get(self.nodes), x, phi, b, self.alpha),
            _ => self.cv.cv_pattern(x, phi, self.alpha),
        }
    }
}

/// Estimate of `P_{Omega; m, n}(alpha)` by direct evaluation of the pattern
/// functions at every sample.
#[allow(clippy::too_many_arguments)]
pub fn sample_nqp_element(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    dv: &DvPatternEvaluator,
    m: usize,
    n: usize,
    alpha: Complex64,
    correction: PhaseCorrection,
) -> Result<Estimate> {
    dv.radial_value(m, n, 0.0)?;
    let ck = CvKernel::new(cv, correction.cv_bins, alpha);
    let factor = correction.dv_bins.map_or(1.0, |b| bin_factor(m, n, b));
    let dm = m as f64 - n as f64;
    sample_kernel(ensemble, weights, |g, x1, x2| {
        let f = ck.eval(x1, g.phi_cv);
        let r = dv.radial_value(m, n, x2).expect("index checked");
        Complex64::from_polar(f * r * factor, dm * g.phi_dv)
    })
}

/// Estimate of the single-mode quasiprobability `P_Omega(alpha)` of the CV
/// mode, with the DV mode traced out (`F = 1`).
pub fn sample_cv_quasiprobability(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    alpha: Complex64,
    correction: PhaseCorrection,
) -> Result<Estimate> {
    let ck = CvKernel::new(cv, correction.cv_bins, alpha);
    sample_kernel(ensemble, weights, |g, x1, _| Complex64::new(ck.eval(x1, g.phi_cv), 0.0))
}

/// Estimate of the DV density-matrix element `rho_{m,n}` (CV mode marginalized).
pub fn sample_dv_density(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    dv: &DvPatternEvaluator,
    m: usize,
    n: usize,
    correction: PhaseCorrection,
) -> Result<Estimate> {
    dv.radial_value(m, n, 0.0)?;
    let factor = correction.dv_bins.map_or(1.0, |b| bin_factor(m, n, b));
    let dm = m as f64 - n as f64;
    sample_kernel(ensemble, weights, |g, _, x2| {
        let r = dv.radial_value(m, n, x2).expect("index checked");
        Complex64::from_polar(r * factor, dm * g.phi_dv)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::PhaseGroup;
    use alloc::vec;

    fn group(p1: f64, p2: f64, n: usize) -> PhaseGroup {
        PhaseGroup { phi_cv: p1, phi_dv: p2, x_cv: (0..n).map(|i| i as f64 * 0.1).collect(), x_dv: vec![0.0; n] }
    }

    #[test]
    fn equidistant_weights() {
        let e = PhaseGroupedEnsemble::from_groups(vec![group(0.0, 0.0, 100), group(PI / 2.0, 0.0, 300)]).unwrap();
        let w = compute_weights(&e).unwrap();
        assert_eq!(w.scheme, WeightScheme::Equidistant);
        assert_eq!(w.weights, [1.0 / 200.0, 1.0 / 600.0]);
        assert!((w.total(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_interval_weights() {
        let e = PhaseGroupedEnsemble::from_groups(vec![group(0.0, 0.0, 10), group(1.0, 0.0, 20), group(2.0, 0.0, 40)]).unwrap();
        let w = compute_weights(&e).unwrap();
        assert_eq!(w.scheme, WeightScheme::GeneralInterval);
        let want = [1.0 / PI / 10.0, 1.0 / PI / 20.0, (PI - 2.0) / PI / 40.0];
        for (a, b) in w.weights.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((w.total(&e) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_kernel() {
        let e = PhaseGroupedEnsemble::from_groups(vec![group(0.0, 0.0, 7), group(PI / 2.0, 0.0, 13)]).unwrap();
        let w = compute_weights(&e).unwrap();
        let est = sample_kernel(&e, &w, |_, _, _| Complex64::new(2.5, -1.0)).unwrap();
        assert!((est.value - Complex64::new(2.5, -1.0)).norm() < 1e-15);
        assert_eq!(est.sigma, 0.0);
    }

    #[test]
    fn uniform_counts_match_plain_mean_bitwise() {
        let e = PhaseGroupedEnsemble::from_groups(vec![group(0.0, 0.0, 50), group(PI / 2.0, 0.0, 50)]).unwrap();
        let w = compute_weights(&e).unwrap();
        let k = |_: &PhaseGroup, x: f64, _: f64| Complex64::new((3.0 * x).sin(), x * x);
        let a = sample_kernel(&e, &w, k).unwrap();
        let b = unweighted_mean(&e, k).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn dv_phase_factor() {
        assert_eq!(bin_factor(1, 1, 6), 1.0);
        let f = bin_factor(1, 0, 6);
        assert!((f - (PI / 12.0).sin() / (PI / 12.0)).abs() < 1e-15);
        assert!((f - 0.98862).abs() < 1e-5);
    }
}
