//! Fast evaluation of the sampled NQP matrix on a whole grid.
//!
//! The CV pattern depends on `alpha` only through the shift `c = 2 Re(alpha e^{-i phi})`.
//! For every group and matrix element the sums `H(c) = sum_j r(x_dv_j) f0(s_j - c)`
//! are computed once on a lattice in `c` (spacing equal to the `f0` table
//! spacing) as a correlation of a sample histogram with the `f0` table; each
//! grid point then only interpolates `H` at the bin-average nodes. Second
//! moments interpolate `f'(s)^2` between nodes of spacing `VAR_BIN`.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, SQRT_2};
use num_complex::Complex64;

use crate::ensemble::PhaseGroupedEnsemble;
use crate::error::{NqpError, Result};
use crate::estimator::{sample_kernel, Estimate, PhaseCorrection, WeightAssignment};
use crate::grid::PhaseSpaceGrid;
use crate::matrix::{CMatrix, RMatrix};
use crate::numeric::interp::cubic_weights;
use crate::numeric::quad::GaussLegendreCache;
use crate::pattern_cv::{shift, CvPatternEvaluator, TABLE_STEP};
use crate::pattern_dv::{bin_factor, DvPatternEvaluator};

const VAR_BIN: f64 = 0.04;
const MARGIN: f64 = 4.0 * TABLE_STEP;

/// DV side of the estimator kernel.
#[derive(Clone, Copy)]
pub(crate) enum DvKernel<'a> {
    Pattern(&'a DvPatternEvaluator),
    /// `F = 1`: the CV quasiprobability with the DV mode traced out.
    Unit,
}

impl DvKernel<'_> {
    fn radial(&self, m: usize, n: usize, x: f64) -> f64 {
        match self {
            DvKernel::Pattern(dv) => dv.radial_value(m, n, x).expect("indices checked"),
            DvKernel::Unit => 1.0,
        }
    }
}

/// `f0` on the lattice `k * TABLE_STEP` for `k` in `[lo, hi]`.
struct Lattice {
    lo: isize,
    v: Vec<f64>,
}

impl Lattice {
    fn new(cv: &CvPatternEvaluator, lo: isize, hi: isize) -> Self {
        let tab = cv.lattice();
        let v = (lo..=hi)
            .map(|k| {
                let a = k.unsigned_abs();
                if a < tab.len() { tab[a] } else { cv.f0_direct(k as f64 * TABLE_STEP) }
            })
            .collect();
        Lattice { lo, v }
    }

    #[inline]
    fn at(&self, k: isize) -> f64 {
        self.v[(k - self.lo) as usize]
    }

    /// Cubic interpolation at `s`; the caller guarantees coverage.
    #[inline]
    fn interp(&self, s: f64) -> f64 {
        let u = s / TABLE_STEP;
        let i = u.floor();
        let w = cubic_weights(u - i);
        let base = (i as isize - 1 - self.lo) as usize;
        let v = &self.v[base..base + 4];
        w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]
    }
}

struct Group {
    cv_index: usize,
    n: f64,
    fraction: f64,
    /// Per element: `H` on the c-lattice.
    h: Vec<Vec<f64>>,
    /// Per element: DV phase factor including the bin average.
    phase: Vec<Complex64>,
    /// Per element: square of the DV bin-average factor.
    factor_sq: Vec<f64>,
    bin_lo: isize,
    /// Per element: `sum r^2` per variance bin.
    bins: Vec<Vec<f64>>,
}

pub(crate) struct FieldEngine<'a> {
    cv: &'a CvPatternEvaluator,
    cv_phases: Vec<f64>,
    cv_bins: Option<usize>,
    elements: Vec<(usize, usize)>,
    d: usize,
    c0: f64,
    groups: Vec<Group>,
    lattice: Lattice,
    /// Union of variance-bin ranges per CV phase.
    bin_range: Vec<(isize, isize)>,
    rules: GaussLegendreCache,
    grid: PhaseSpaceGrid,
}

impl<'a> FieldEngine<'a> {
    pub(crate) fn new(
        ensemble: &PhaseGroupedEnsemble,
        weights: &WeightAssignment,
        cv: &'a CvPatternEvaluator,
        dv: DvKernel<'_>,
        grid: &PhaseSpaceGrid,
        d: usize,
        correction: PhaseCorrection,
    ) -> Result<Self> {
        if weights.weights.len() != ensemble.num_groups() {
            return Err(NqpError::param("weights do not match the ensemble"));
        }
        if let Some(g) = ensemble.groups().iter().find(|g| g.len() < 2) {
            return Err(NqpError::data(alloc::format!("group ({}, {}) has fewer than 2 samples", g.phi_cv, g.phi_dv)));
        }
        match dv {
            DvKernel::Pattern(p) if d == 0 || d > p.d() => {
                return Err(NqpError::param(alloc::format!("d = {d} exceeds the DV evaluator dimension {}", p.d())))
            }
            DvKernel::Unit if d != 1 => return Err(NqpError::param("the CV quasiprobability has d = 1")),
            _ => {}
        }
        let elements: Vec<(usize, usize)> = (0..d).flat_map(|m| (m..d).map(move |n| (m, n))).collect();
        let cv_phases = ensemble.phases_cv().to_vec();
        let c_max = 2.0 * grid.max_modulus() + MARGIN;
        let c0 = -c_max;
        let n_c = (2.0 * c_max / TABLE_STEP).ceil() as usize + 1;
        // Sample s-range decides the lattice span.
        let mut s_lo = f64::INFINITY;
        let mut s_hi = f64::NEG_INFINITY;
        for g in ensemble.groups() {
            for &x in &g.x_cv {
                s_lo = s_lo.min(SQRT_2 * x);
                s_hi = s_hi.max(SQRT_2 * x);
            }
        }
        let p_lo = ((s_lo - c0) / TABLE_STEP).floor() as isize - 2;
        let p_hi = ((s_hi - c0) / TABLE_STEP).floor() as isize + 3;
        let k_lo = p_lo - n_c as isize;
        let k_hi = p_hi + 1;
        let s_lim = (s_lo.abs().max(s_hi.abs()) + c_max) / TABLE_STEP;
        let reach = s_lim.ceil() as isize + 8;
        let lattice = Lattice::new(cv, k_lo.min(-reach), k_hi.max(reach));

        let mut groups = Vec::with_capacity(ensemble.num_groups());
        let mut bin_range = vec![(isize::MAX, isize::MIN); cv_phases.len()];
        for (g, &fraction) in ensemble.groups().iter().zip(&weights.fractions) {
            let cv_index = cv_phases.iter().position(|&p| p == g.phi_cv).expect("phase listed");
            let n_el = elements.len();
            let mut lo = isize::MAX;
            let mut hi = isize::MIN;
            let mut blo = isize::MAX;
            let mut bhi = isize::MIN;
            for &x in &g.x_cv {
                let s = SQRT_2 * x;
                let p = ((s - c0) / TABLE_STEP).floor() as isize;
                lo = lo.min(p - 1);
                hi = hi.max(p + 2);
                let b = (s / VAR_BIN).floor() as isize;
                blo = blo.min(b - 1);
                bhi = bhi.max(b + 2);
            }
            let len = (hi - lo + 1) as usize;
            let mut hist = vec![vec![0.0; len]; n_el];
            let mut bins = vec![vec![0.0; (bhi - blo + 1) as usize]; n_el];
            let mut r = vec![0.0; n_el];
            for (&x1, &x2) in g.x_cv.iter().zip(&g.x_dv) {
                for (e, &(m, n)) in elements.iter().enumerate() {
                    r[e] = dv.radial(m, n, x2);
                }
                let s = SQRT_2 * x1;
                let u = (s - c0) / TABLE_STEP;
                let p = u.floor();
                let w = cubic_weights(u - p);
                let base = (p as isize - 1 - lo) as usize;
                let v = s / VAR_BIN;
                let vb = v.floor();
                let vw = cubic_weights(v - vb);
                let b = (vb as isize - 1 - blo) as usize;
                for e in 0..n_el {
                    let h = &mut hist[e][base..base + 4];
                    for q in 0..4 {
                        h[q] += r[e] * w[q];
                    }
                    let r2 = r[e] * r[e];
                    let bb = &mut bins[e][b..b + 4];
                    for q in 0..4 {
                        bb[q] += r2 * vw[q];
                    }
                }
            }
            let h: Vec<Vec<f64>> = hist
                .iter()
                .map(|hp| {
                    (0..n_c)
                        .map(|i| {
                            let k0 = lo - i as isize;
                            let t = &lattice.v[(k0 - lattice.lo) as usize..(k0 - lattice.lo) as usize + len];
                            hp.iter().zip(t).map(|(a, b)| a * b).sum()
                        })
                        .collect()
                })
                .collect();
            let (phase, factor_sq) = elements
                .iter()
                .map(|&(m, n)| {
                    let f = match dv {
                        DvKernel::Pattern(_) => correction.dv_bins.map_or(1.0, |b| bin_factor(m, n, b)),
                        DvKernel::Unit => 1.0,
                    };
                    (Complex64::from_polar(f, (m as f64 - n as f64) * g.phi_dv), f * f)
                })
                .unzip();
            let br = &mut bin_range[cv_index];
            *br = (br.0.min(blo), br.1.max(bhi));
            groups.push(Group { cv_index, n: g.len() as f64, fraction, h, phase, factor_sq, bin_lo: blo, bins });
        }
        let mut engine = FieldEngine {
            cv,
            cv_phases,
            cv_bins: correction.cv_bins,
            elements,
            d,
            c0,

            groups,
            lattice,
            bin_range,
            rules: GaussLegendreCache::new(),
            grid: *grid,
        };
        for k in 0..grid.len() {
            let n = engine.nodes(grid.point(k).norm());
            engine.rules.ensure(n);
        }
        Ok(engine)
    }

    fn nodes(&self, r: f64) -> usize {
        self.cv_bins.map_or(1, |b| self.cv.bin_nodes(r, b))
    }

    /// Shifts `c_q` and half-weights of the bin-average rule at CV phase `phi`.
    fn shifts(&self, alpha: Complex64, phi: f64, out: &mut Vec<(f64, f64)>) {
        out.clear();
        let n = self.nodes(alpha.norm());
        match self.cv_bins {
            Some(b) if n > 1 => {
                let h = FRAC_PI_2 / b as f64;
                let rule = self.rules.get(n);
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    out.push((shift(phi + h * t, alpha), 0.5 * w));
                }
            }
            _ => out.push((shift(phi, alpha), 1.0)),
        }
    }

    #[inline]
    fn interp_h(&self, h: &[f64], c: f64) -> f64 {
        let u = (c - self.c0) / TABLE_STEP;
        let i = u.floor();
        let w = cubic_weights(u - i);
        let i = i as usize;
        w[0] * h[i - 1] + w[1] * h[i] + w[2] * h[i + 1] + w[3] * h[i + 2]
    }

    /// Estimates and errors of all upper-triangle elements at `alpha`.
    pub(crate) fn point(&self, alpha: Complex64) -> (Vec<Complex64>, Vec<f64>) {
        let n_el = self.elements.len();
        let mut shifts_by_phase: Vec<Vec<(f64, f64)>> = vec![Vec::new(); self.cv_phases.len()];
        for (k, &phi) in self.cv_phases.iter().enumerate() {
            self.shifts(alpha, phi, &mut shifts_by_phase[k]);
        }
        // f' at variance-bin centres, per CV phase.
        let fb: Vec<Vec<f64>> = self
            .bin_range
            .iter()
            .zip(&shifts_by_phase)
            .map(|(&(lo, hi), sh)| {
                (lo..=hi)
                    .map(|b| {
                        let s = b as f64 * VAR_BIN;
                        sh.iter().map(|&(c, w)| w * self.lattice.interp(s - c)).sum()
                    })
                    .collect()
            })
            .collect();
        let mut value = vec![Complex64::new(0.0, 0.0); n_el];
        let mut var = vec![0.0; n_el];
        for g in &self.groups {
            let sh = &shifts_by_phase[g.cv_index];
            let (lo, _) = self.bin_range[g.cv_index];
            let f = &fb[g.cv_index][(g.bin_lo - lo) as usize..];
            for e in 0..n_el {
                let s: f64 = sh.iter().map(|&(c, w)| w * self.interp_h(&g.h[e], c)).sum();
                let mean = g.phase[e] * (s / g.n);
                let m2: f64 = g.bins[e].iter().zip(f).map(|(wb, fv)| wb * fv * fv).sum::<f64>() * g.factor_sq[e] / g.n;
                value[e] += g.fraction * mean;
                var[e] += g.fraction * g.fraction * (m2 - mean.norm_sqr()).max(0.0) / g.n;
            }
        }
        (value, var.into_iter().map(f64::sqrt).collect())
    }

    pub(crate) fn matrices(&self, alpha: Complex64) -> (CMatrix, RMatrix) {
        let (v, s) = self.point(alpha);
        let mut m = CMatrix::zeros(self.d);
        let mut r = RMatrix::zeros(self.d);
        for (e, &(a, b)) in self.elements.iter().enumerate() {
            let z = if a == b { Complex64::new(v[e].re, 0.0) } else { v[e] };
            m.set(a, b, z);
            m.set(b, a, z.conj());
            r.set(a, b, s[e]);
            r.set(b, a, s[e]);
        }
        (m, r)
    }

    pub(crate) fn run(&self) -> (Vec<CMatrix>, Vec<RMatrix>) {
        let grid = self.grid;
        let out = crate::par::map(grid.len(), |k| self.matrices(grid.point(k)));
        out.into_iter().unzip()
    }
}

/// Estimate of `int P_{Omega; m, n}(alpha) d^2 alpha` over `grid` (trapezoid
/// rule), with the error of the integrated kernel.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrated_element(
    ensemble: &PhaseGroupedEnsemble,
    weights: &WeightAssignment,
    cv: &CvPatternEvaluator,
    dv: DvKernel<'_>,
    grid: &PhaseSpaceGrid,
    m: usize,
    n: usize,
    correction: PhaseCorrection,
) -> Result<Estimate> {
    if let DvKernel::Pattern(p) = dv {
        p.radial_value(m, n, 0.0)?;
    }
    let c_max = 2.0 * grid.max_modulus() + MARGIN;
    let c0 = -c_max;
    let n_c = (2.0 * c_max / TABLE_STEP).ceil() as usize + 1;
    let tw = grid.trapezoid_weights();
    let mut rules = GaussLegendreCache::new();
    let nodes = |r: f64| correction.cv_bins.map_or(1, |b| cv.bin_nodes(r, b));
    for k in 0..grid.len() {
        rules.ensure(nodes(grid.point(k).norm()));
    }
    let mut s_max: f64 = 0.0;
    for g in ensemble.groups() {
        for &x in &g.x_cv {
            s_max = s_max.max((SQRT_2 * x).abs());
        }
    }
    let reach = ((s_max + 2.0 * c_max) / TABLE_STEP).ceil() as isize + 8;
    let lattice = Lattice::new(cv, -reach, reach);
    // G_k(s) = sum_alpha w_alpha f'(s; alpha) on an s-lattice aligned with the c-lattice.
    let s_cells = ((s_max + MARGIN) / TABLE_STEP).ceil() as isize;
    let tables: Vec<(isize, Vec<f64>)> = ensemble
        .phases_cv()
        .iter()
        .map(|&phi| {
            let mut hc = vec![0.0; n_c + 4];
            for (k, &wa) in tw.iter().enumerate() {
                let alpha = grid.point(k);
                let nq = nodes(alpha.norm());
                let mut add = |c: f64, w: f64| {
                    let u = (c - c0) / TABLE_STEP;
                    let i = u.floor();
                    let cw = cubic_weights(u - i);
                    let i = i as usize;
                    for q in 0..4 {
                        hc[i + q - 1] += w * cw[q];
                    }
                };
                match correction.cv_bins {
                    Some(b) if nq > 1 => {
                        let h = FRAC_PI_2 / b as f64;
                        let rule = rules.get(nq);
                        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                            add(shift(phi + h * t, alpha), 0.5 * w * wa);
                        }
                    }
                    _ => add(shift(phi, alpha), wa),
                }
            }
            // s-lattice s_p = c0 + p * step, covering |s| <= s_max.
            let p_lo = ((-s_max - MARGIN - c0) / TABLE_STEP).floor() as isize;
            let len = (2 * s_cells + 8) as usize;
            let g: Vec<f64> = (0..len as isize)
                .map(|j| {
                    let p = p_lo + j;
                    hc.iter().enumerate().map(|(i, &hv)| hv * lattice.at(p - i as isize)).sum()
                })
                .collect();
            (p_lo, g)
        })
        .collect();
    let phases = ensemble.phases_cv().to_vec();
    let dv_factor = match dv {
        DvKernel::Pattern(_) => correction.dv_bins.map_or(1.0, |b| bin_factor(m, n, b)),
        DvKernel::Unit => 1.0,
    };
    let dm = m as f64 - n as f64;
    sample_kernel(ensemble, weights, |g, x1, x2| {
        let k = phases.iter().position(|&p| p == g.phi_cv).expect("phase listed");
        let (p_lo, t) = &tables[k];
        let u = (SQRT_2 * x1 - c0) / TABLE_STEP - *p_lo as f64;
        let i = u.floor();
        let w = cubic_weights(u - i);
        let i = i as usize;
        let gv = w[0] * t[i - 1] + w[1] * t[i] + w[2] * t[i + 1] + w[3] * t[i + 2];
        Complex64::from_polar(gv * dv.radial(m, n, x2) * dv_factor, dm * g.phi_dv)
    })
}
