//! NQP matrix field assembly, minimal eigenvalues of leading principal
//! submatrices and significance maps.
//!
//! Significances use the sign convention in which positive values indicate
//! negativity: `S_n = -P_{n,n} / sigma`, `Sigma_n = -e_n / sigma(e_n)`.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::ensemble::PhaseGroupedEnsemble;
use crate::error::{NqpError, Result};
use crate::estimator::{Estimate, PhaseCorrection, WeightAssignment};
use crate::field::{integrated_element, DvKernel, FieldEngine};
use crate::grid::PhaseSpaceGrid;
use crate::matrix::{CMatrix, NqpMatrixField, ProjectionVector, RMatrix};
use crate::numeric::eigen::hermitian_eigen;
use crate::pattern_cv::CvPatternEvaluator;
use crate::pattern_dv::DvPatternEvaluator;

/// Significance above which a negativity counts as detected.
pub const DETECTION_THRESHOLD: f64 = 5.0;

/// Sampled `d x d` NQP matrices and their errors on every grid point.
pub fn assemble_field(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    dv: &DvPatternEvaluator,
    grid: &PhaseSpaceGrid,
    d: usize,
    correction: PhaseCorrection,
) -> Result<NqpMatrixField> {
    let engine = FieldEngine::new(ensemble, weights, cv, DvKernel::Pattern(dv), grid, d, correction)?;
    let (values, errors) = engine.run();
    NqpMatrixField::new(*grid, d, cv.w(), values, errors)
}

/// Single-mode field (`d = 1`) of the CV quasiprobability with the DV mode
/// traced out.
pub fn assemble_cv_field(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    grid: &PhaseSpaceGrid,
    correction: PhaseCorrection,
) -> Result<NqpMatrixField> {
    let engine = FieldEngine::new(ensemble, weights, cv, DvKernel::Unit, grid, 1, correction)?;
    let (values, errors) = engine.run();
    NqpMatrixField::new(*grid, 1, cv.w(), values, errors)
}

/// Sampled `int P_{Omega; m, n}(alpha) d^2 alpha` over the grid (trapezoid
/// rule applied to the kernel), so the error accounts for correlations
/// between grid points.
#[allow(clippy::too_many_arguments)]
pub fn integrate_element(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    dv: Option<&DvPatternEvaluator>,
    grid: &PhaseSpaceGrid,
    m: usize,
    n: usize,
    correction: PhaseCorrection,
) -> Result<Estimate> {
    let kernel = match dv {
        Some(p) => DvKernel::Pattern(p),
        None if m == 0 && n == 0 => DvKernel::Unit,
        None => return Err(NqpError::param("the CV quasiprobability has only the (0, 0) element")),
    };
    integrated_element(ensemble, weights, cv, kernel, grid, m, n, correction)
}

/// Smallest eigenvalue and its unit eigenvector (first of a degenerate set in
/// decomposition order).
pub fn min_eigenpair(m: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    if !m.is_hermitian() {
        return Err(NqpError::param("matrix is not Hermitian"));
    }
    if m.d == 1 {
        return Ok((m.get(0, 0).re, vec![Complex64::new(1.0, 0.0)]));
    }
    let (vals, mut vecs) = hermitian_eigen(m);
    Ok((vals[0], vecs.swap_remove(0)))
}

/// `sigma(e) = sum_{m,n} |v_m| sigma_{m,n} |v_n|`.
pub fn eigenvalue_error(v: &[Complex64], sigma: &RMatrix) -> f64 {
    assert_eq!(v.len(), sigma.d, "dimension mismatch");
    let a: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let mut s = 0.0;
    for (i, ai) in a.iter().enumerate() {
        for (j, aj) in a.iter().enumerate() {
            s += ai * sigma.get(i, j) * aj;
        }
    }
    s
}

/// `-value / sigma`, with `+-inf` when `sigma = 0` and the value is nonzero.
pub fn significance(value: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        -value / sigma
    } else if value < 0.0 {
        f64::INFINITY
    } else if value > 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Analysis of one grid point; index `n` refers to the `(n+1) x (n+1)`
/// leading principal submatrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PointAnalysis {
    pub alpha: Complex64,
    pub e: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub sigma_e: Vec<f64>,
    /// Diagonal significances `S_n`.
    pub s: Vec<f64>,
    /// Eigenvalue significances `Sigma_n`.
    pub sigma: Vec<f64>,
    /// Minimal eigenvalue of order `n` is (numerically) degenerate.
    pub degenerate: Vec<bool>,
}

/// Leading-submatrix analysis of a single Hermitian matrix with errors.
pub fn analyze_point(alpha: Complex64, value: &CMatrix, error: &RMatrix) -> Result<PointAnalysis> {
    let d = value.d;
    let mut p = PointAnalysis {
        alpha,
        e: Vec::with_capacity(d),
        vectors: Vec::with_capacity(d),
        sigma_e: Vec::with_capacity(d),
        s: Vec::with_capacity(d),
        sigma: Vec::with_capacity(d),
        degenerate: Vec::with_capacity(d),
    };
    for n in 0..d {
        let sub = value.leading(n + 1);
        let (mut e, mut v, degenerate) = if n == 0 {
            (sub.get(0, 0).re, vec![Complex64::new(1.0, 0.0)], false)
        } else {
            let (vals, mut vecs) = hermitian_eigen(&sub);
            let scale = vals.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
            let deg = vals[1] - vals[0] <= 1e-12 * scale;
            (vals[0], vecs.swap_remove(0), deg)
        };
        if n > 0 && e > p.e[n - 1] {
            // Rounding can break interlacing; the padded previous vector attains e_{n-1}.
            e = p.e[n - 1];
            v = p.vectors[n - 1].clone();
            v.push(Complex64::new(0.0, 0.0));
        }
        let se = eigenvalue_error(&v, &error.leading(n + 1));
        let diag = value.get(n, n).re;
        p.s.push(significance(diag, error.get(n, n)));
        p.sigma.push(significance(e, se));
        p.e.push(e);
        p.vectors.push(v);
        p.sigma_e.push(se);
        p.degenerate.push(degenerate);
    }
    Ok(p)
}

/// Global maximum of a significance map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum {
    pub n: usize,
    pub value: f64,
    pub alpha: Complex64,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignificanceReport {
    pub grid: PhaseSpaceGrid,
    pub d: usize,
    pub w: f64,
    pub points: Vec<PointAnalysis>,
    /// `max_alpha S_n` for each `n`.
    pub max_s: Vec<Maximum>,
    /// `max_alpha Sigma_n` for each `n`.
    pub max_sigma: Vec<Maximum>,
    /// Number of infinite significances (zero error with nonzero value).
    pub infinite: usize,
}

impl SignificanceReport {
    /// `S_n` over the grid.
    pub fn s_map(&self, n: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.s[n]).collect()
    }

    /// `Sigma_n` over the grid.
    pub fn sigma_map(&self, n: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma[n]).collect()
    }

    /// Largest `Sigma_n` over all orders and grid points.
    pub fn strongest(&self) -> Maximum {
        *self
            .max_sigma
            .iter()
            .reduce(|a, b| if b.value > a.value { b } else { a })
            .expect("d >= 1")
    }

    pub fn detected(&self) -> bool {
        self.strongest().value >= DETECTION_THRESHOLD
    }

    pub fn verdict(&self) -> String {
        if self.detected() {
            let m = self.strongest();
            format!(
                "CHN detected at Sigma_{} = {:.2} sigma (alpha = {:.3}{:+.3}i)",
                m.n, m.value, m.alpha.re, m.alpha.im
            )
        } else {
            String::from("no CHN at this width")
        }
    }
}

fn maxima(points: &[PointAnalysis], d: usize, pick: impl Fn(&PointAnalysis, usize) -> f64) -> Vec<Maximum> {
    (0..d)
        .map(|n| {
            let mut best = Maximum { n, value: f64::NEG_INFINITY, alpha: points[0].alpha, index: 0 };
            for (k, p) in points.iter().enumerate() {
                let v = pick(p, n);
                if v > best.value {
                    best = Maximum { n, value: v, alpha: p.alpha, index: k };
                }
            }
            best
        })
        .collect()
}

/// Per-point minimal eigenvalues, errors and significances with their maxima.
pub fn significance_report(field: &NqpMatrixField) -> Result<SignificanceReport> {
    if field.values.is_empty() {
        return Err(NqpError::param("empty field"));
    }
    let grid = field.grid;
    let results =
        crate::par::map(field.values.len(), |k| analyze_point(grid.point(k), &field.values[k], &field.errors[k]));
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let infinite = points
        .iter()
        .map(|p| p.s.iter().chain(&p.sigma).filter(|v| v.is_infinite()).count())
        .sum();
    let max_s = maxima(&points, field.d, |p, n| p.s[n]);
    let max_sigma = maxima(&points, field.d, |p, n| p.sigma[n]);
    Ok(SignificanceReport { grid, d: field.d, w: field.w, points, max_s, max_sigma, infinite })
}

/// Unnormalized conditional quasiprobability `psi^dag P(alpha) psi` with its
/// propagated error, per grid point.
pub fn conditional_distribution(field: &NqpMatrixField, psi: &ProjectionVector) -> Result<Vec<(f64, f64)>> {
    if psi.dim() != field.d {
        return Err(NqpError::param(format!("projection has dimension {}, field has {}", psi.dim(), field.d)));
    }
    let c = psi.components();
    Ok(field
        .values
        .iter()
        .zip(&field.errors)
        .map(|(m, s)| (m.quadratic_form(c).re, eigenvalue_error(c, s)))
        .collect())
}
