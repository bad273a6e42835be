//! Synthetic two-mode homodyne data for catalog states.
//!
//! Each phase-pair cell is sampled from the exact joint density by drawing the
//! CV quadrature from its marginal and then the DV quadrature from the
//! conditional density given the CV value. Marginals are inverted on
//! tabulated CDFs with monotone cubic Hermite interpolation; the conditional
//! CDF is a quadratic form in tabulated integrals `int chi_n chi_m` of Fock
//! wavefunctions, so it is exact up to the table resolution.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::ensemble::{PhaseGroup, PhaseGroupedEnsemble};
use crate::error::{NqpError, Result};
use crate::numeric::interp::cubic_hermite;
use crate::numeric::special::hermite_functions;
use crate::state::{CompiledState, DisplacedFock, StateModel};

/// Table spacing, 4096 intervals over [-8, 8].
const TABLE_STEP: f64 = 16.0 / 4096.0;
const MIN_HALF_RANGE: f64 = 8.0;
const FOCK_TOL: f64 = 1e-14;
const NORM_TOL: f64 = 1e-6;

/// Provenance recorded alongside simulated data.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleMetadata {
    pub tag: String,
    pub seed: u64,
    pub gain: Option<f64>,
    pub transmission: Option<f64>,
    pub eta: f64,
}

impl EnsembleMetadata {
    pub fn for_model(model: &StateModel, seed: u64) -> Result<Self> {
        Ok(EnsembleMetadata {
            tag: String::from(model.tag()),
            seed,
            gain: model.gain(),
            transmission: model.transmission(),
            eta: model.compile()?.eta,
        })
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the generator for cell `cell` under master seed `seed`.
pub fn cell_seed(seed: u64, cell: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(cell.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Wavefunction amplitudes of several displaced Fock states at one point,
/// sharing the Hermite recurrence between states with equal displacement.
fn amplitudes(states: &[DisplacedFock], x: f64, phi: f64, out: &mut Vec<Complex64>) {
    out.clear();
    let mut cache: Vec<(Complex64, Vec<f64>, f64, f64)> = Vec::new();
    for s in states {
        let idx = match cache.iter().position(|c| c.0 == s.beta) {
            Some(i) => i,
            None => {
                let nmax = states.iter().filter(|t| t.beta == s.beta).map(|t| t.n).max().unwrap_or(0);
                let g = s.beta * Complex64::from_polar(1.0, -phi);
                let (q0, p0) = (SQRT_2 * g.re, SQRT_2 * g.im);
                cache.push((s.beta, hermite_functions(nmax, x - q0), q0, p0));
                cache.len() - 1
            }
        };
        let (_, h, q0, p0) = &cache[idx];
        out.push(Complex64::from_polar(h[s.n], -(s.n as f64) * phi - 0.5 * q0 * p0 + p0 * x));
    }
}

/// Monotone cubic Hermite inversion of a tabulated CDF.
///
/// `cdf(i)` and `dens(i)` give the CDF and its slope at node `i`; `target`
/// must lie in `[cdf(0), cdf(n-1)]`.
fn invert(target: f64, n: usize, x0: f64, h: f64, cdf: impl Fn(usize) -> f64, dens: impl Fn(usize) -> f64) -> f64 {
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if cdf(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (c0, c1) = (cdf(lo), cdf(hi));
    let delta = (c1 - c0) / h;
    if !(delta > 0.0) {
        return x0 + (lo as f64 + 0.5) * h;
    }
    let mut d0 = dens(lo).max(0.0);
    let mut d1 = dens(hi).max(0.0);
    let (a, b) = (d0 / delta, d1 / delta);
    if a * a + b * b > 9.0 {
        let tau = 3.0 / (a * a + b * b).sqrt();
        d0 = tau * a * delta;
        d1 = tau * b * delta;
    }
    let (mut tl, mut tr) = (0.0, 1.0);
    for _ in 0..48 {
        let tm = 0.5 * (tl + tr);
        if cubic_hermite(tm, c0, d0, c1, d1, h) < target {
            tl = tm;
        } else {
            tr = tm;
        }
    }
    x0 + (lo as f64 + 0.5 * (tl + tr)) * h
}

fn half_range(states: impl Iterator<Item = DisplacedFock>) -> f64 {
    states
        .map(|s| SQRT_2 * s.beta.norm() + (2.0 * s.n as f64 + 1.0).sqrt() + 6.0)
        .fold(MIN_HALF_RANGE, f64::max)
}

/// Pure component with its DV Fock decomposition flattened for fast evaluation.
struct Component {
    weight: f64,
    /// CV states over all DV levels.
    cv_states: Vec<DisplacedFock>,
    /// `(dv level, coefficient, index into cv_states)`.
    entries: Vec<(usize, Complex64, usize)>,
    levels: usize,
}

/// Precomputed sampling machinery for one state.
pub struct Sampler {
    components: Vec<Component>,
    eta: f64,
    levels: usize,
    cv_half_range: f64,
    dv_x0: f64,
    dv_nodes: usize,
    /// Pairs `(n, m)`, `n <= m`, whose products appear in some component.
    pairs: Vec<(usize, usize)>,
    /// Node values of `int_{-L}^{x} chi_n chi_m` per pair.
    pair_cdf: Vec<Vec<f64>>,
    /// Node values of `chi_n chi_m` per pair.
    pair_dens: Vec<Vec<f64>>,
}

/// Inverse-CDF table of the CV marginal at one phase.
pub struct MarginalTable {
    x0: f64,
    cdf: Vec<f64>,
    dens: Vec<f64>,
}

impl MarginalTable {
    pub fn sample(&self, u: f64) -> f64 {
        let n = self.cdf.len();
        invert(u, n, self.x0, TABLE_STEP, |i| self.cdf[i], |i| self.dens[i])
    }

    /// Tabulated CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let u = (x - self.x0) / TABLE_STEP;
        if u <= 0.0 {
            return 0.0;
        }
        let i = u.floor() as usize;
        if i + 1 >= self.cdf.len() {
            return 1.0;
        }
        cubic_hermite(u - i as f64, self.cdf[i], self.dens[i], self.cdf[i + 1], self.dens[i + 1], TABLE_STEP)
    }
}

impl Sampler {
    pub fn new(model: &StateModel) -> Result<Self> {
        let compiled: CompiledState = model.compile()?;
        let mut components = Vec::new();
        let mut levels = 1;
        for (w, pure) in &compiled.components {
            let dec = pure.dv_fock_decomposition(FOCK_TOL);
            let mut cv_states: Vec<DisplacedFock> = Vec::new();
            let mut entries = Vec::new();
            for (n, list) in dec.iter().enumerate() {
                for &(c, s) in list {
                    let idx = match cv_states.iter().position(|t| *t == s) {
                        Some(i) => i,
                        None => {
                            cv_states.push(s);
                            cv_states.len() - 1
                        }
                    };
                    entries.push((n, c, idx));
                }
            }
            levels = levels.max(dec.len());
            components.push(Component { weight: *w, cv_states, entries, levels: dec.len() });
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for c in &components {
            let mut present = vec![false; c.levels];
            for e in &c.entries {
                present[e.0] = true;
            }
            for n in 0..c.levels {
                for m in n..c.levels {
                    if present[n] && present[m] && !pairs.contains(&(n, m)) {
                        pairs.push((n, m));
                    }
                }
            }
        }
        pairs.sort_unstable();
        let cv_half_range = half_range(components.iter().flat_map(|c| c.cv_states.iter().copied()));
        let dv_half = half_range(core::iter::once(DisplacedFock::new(Complex64::new(0.0, 0.0), levels - 1)));
        let intervals = (2.0 * dv_half / TABLE_STEP).ceil() as usize;
        let dv_x0 = -0.5 * intervals as f64 * TABLE_STEP;
        let dv_nodes = intervals + 1;
        let mut pair_cdf = vec![Vec::with_capacity(dv_nodes); pairs.len()];
        let mut pair_dens = vec![Vec::with_capacity(dv_nodes); pairs.len()];
        let mut prev = hermite_functions(levels - 1, dv_x0);
        for (p, &(n, m)) in pairs.iter().enumerate() {
            pair_cdf[p].push(0.0);
            pair_dens[p].push(prev[n] * prev[m]);
        }
        for i in 1..dv_nodes {
            let x = dv_x0 + i as f64 * TABLE_STEP;
            let mid = hermite_functions(levels - 1, x - 0.5 * TABLE_STEP);
            let cur = hermite_functions(levels - 1, x);
            for (p, &(n, m)) in pairs.iter().enumerate() {
                let f0 = prev[n] * prev[m];
                let fm = mid[n] * mid[m];
                let f1 = cur[n] * cur[m];
                let last = pair_cdf[p][i - 1];
                pair_cdf[p].push(last + TABLE_STEP / 6.0 * (f0 + 4.0 * fm + f1));
                pair_dens[p].push(f1);
            }
            prev = cur;
        }
        Ok(Sampler {
            components,
            eta: compiled.eta,
            levels,
            cv_half_range,
            dv_x0,
            dv_nodes,
            pairs,
            pair_cdf,
            pair_dens,
        })
    }

    /// DV Fock amplitudes `a_{k,n}(x1)` of every component at CV point `x1`.
    fn dv_amplitudes(&self, x1: f64, phi1: f64, out: &mut Vec<Vec<Complex64>>, scratch: &mut Vec<Complex64>) {
        out.resize(self.components.len(), Vec::new());
        for (c, a) in self.components.iter().zip(out.iter_mut()) {
            a.clear();
            a.resize(c.levels, Complex64::new(0.0, 0.0));
            amplitudes(&c.cv_states, x1, phi1, scratch);
            for &(n, coef, idx) in &c.entries {
                a[n] += coef * scratch[idx];
            }
        }
    }

    /// Lossless CV marginal density at one phase.
    pub fn marginal_density(&self, x1: f64, phi1: f64) -> f64 {
        let mut a = Vec::new();
        let mut s = Vec::new();
        self.dv_amplitudes(x1, phi1, &mut a, &mut s);
        self.components.iter().zip(&a).map(|(c, v)| c.weight * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum()
    }

    pub fn marginal_table(&self, phi1: f64) -> Result<MarginalTable> {
        let intervals = (2.0 * self.cv_half_range / TABLE_STEP).ceil() as usize;
        let x0 = -0.5 * intervals as f64 * TABLE_STEP;
        let mut dens = Vec::with_capacity(intervals + 1);
        let mut cdf = Vec::with_capacity(intervals + 1);
        let mut a = Vec::new();
        let mut s = Vec::new();
        let mut density = |x: f64| {
            self.dv_amplitudes(x, phi1, &mut a, &mut s);
            self.components.iter().zip(&a).map(|(c, v)| c.weight * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>()
        };
        dens.push(density(x0));
        cdf.push(0.0);
        for i in 1..=intervals {
            let x = x0 + i as f64 * TABLE_STEP;
            let fm = density(x - 0.5 * TABLE_STEP);
            let f1 = density(x);
            let last = cdf[i - 1];
            cdf.push(last + TABLE_STEP / 6.0 * (dens[i - 1] + 4.0 * fm + f1));
            dens.push(f1);
        }
        let z = cdf[intervals];
        if !((z - 1.0).abs() < NORM_TOL) {
            return Err(NqpError::numerical(alloc::format!(
                "quadrature density at phase {phi1} integrates to {z}, not 1"
            )));
        }
        for v in cdf.iter_mut().chain(dens.iter_mut()) {
            *v /= z;
        }
        Ok(MarginalTable { x0, cdf, dens })
    }

    /// Draws `(x_cv, x_dv)` pairs for one phase pair.
    pub fn sample_cell<R: Rng>(&self, table: &MarginalTable, phi1: f64, phi2: f64, n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut xs1 = Vec::with_capacity(n);
        let mut xs2 = Vec::with_capacity(n);
        let mut a = Vec::new();
        let mut s = Vec::new();
        let mut coef = vec![Complex64::new(0.0, 0.0); self.pairs.len()];
        let phase: Vec<Complex64> = (0..self.levels).map(|k| Complex64::from_polar(1.0, -(k as f64) * phi2)).collect();
        let se = self.eta.sqrt();
        let sn = (1.0 - self.eta).sqrt();
        for _ in 0..n {
            let x1 = table.sample(rng.random::<f64>());
            self.dv_amplitudes(x1, phi1, &mut a, &mut s);
            for c in coef.iter_mut() {
                *c = Complex64::new(0.0, 0.0);
            }
            for (comp, amps) in self.components.iter().zip(&a) {
                for (p, &(k, l)) in self.pairs.iter().enumerate() {
                    if k < comp.levels && l < comp.levels {
                        let v = amps[k] * phase[k] * (amps[l] * phase[l]).conj();
                        coef[p] += comp.weight * if k == l { v } else { v * 2.0 };
                    }
                }
            }
            let cdf = |i: usize| -> f64 { coef.iter().zip(&self.pair_cdf).map(|(c, t)| c.re * t[i]).sum() };
            let dens = |i: usize| -> f64 { coef.iter().zip(&self.pair_dens).map(|(c, t)| c.re * t[i]).sum() };
            let total = cdf(self.dv_nodes - 1);
            let target = rng.random::<f64>() * total;
            let x2 = invert(target, self.dv_nodes, self.dv_x0, TABLE_STEP, cdf, dens);
            if self.eta < 1.0 {
                let v1: f64 = rng.sample(StandardNormal);
                let v2: f64 = rng.sample(StandardNormal);
                xs1.push(se * x1 + sn * FRAC_1_SQRT_2 * v1);
                xs2.push(se * x2 + sn * FRAC_1_SQRT_2 * v2);
            } else {
                xs1.push(x1);
                xs2.push(x2);
            }
        }
        (xs1, xs2)
    }
}

/// Simulated ensemble with `counts[i][j]` samples at phase pair
/// `(phases_cv[i], phases_dv[j])`.
pub fn sample_ensemble(
    model: &StateModel,
    phases_cv: &[f64],
    phases_dv: &[f64],
    counts: &[Vec<usize>],
    seed: u64,
) -> Result<PhaseGroupedEnsemble> {
    if counts.len() != phases_cv.len() || counts.iter().any(|r| r.len() != phases_dv.len()) {
        return Err(NqpError::param("counts must be an I_cv x I_dv matrix"));
    }
    if counts.iter().flatten().any(|&c| c < 2) {
        return Err(NqpError::param("every phase-pair cell needs at least 2 samples"));
    }
    for p in phases_cv.iter().chain(phases_dv) {
        if !(0.0..core::f64::consts::PI).contains(p) {
            return Err(NqpError::param(alloc::format!("phase {p} outside [0, pi)")));
        }
    }
    let sampler = Sampler::new(model)?;
    let tables = crate::par::map(phases_cv.len(), |i| sampler.marginal_table(phases_cv[i]));
    let tables = tables.into_iter().collect::<Result<Vec<_>>>()?;
    let n2 = phases_dv.len();
    let groups = crate::par::map(phases_cv.len() * n2, |cell| {
        let (i, j) = (cell / n2, cell % n2);
        let mut rng = ChaCha20Rng::seed_from_u64(cell_seed(seed, cell as u64));
        let (x_cv, x_dv) = sampler.sample_cell(&tables[i], phases_cv[i], phases_dv[j], counts[i][j], &mut rng);
        PhaseGroup { phi_cv: phases_cv[i], phi_dv: phases_dv[j], x_cv, x_dv }
    });
    PhaseGroupedEnsemble::from_groups(groups)
}

/// `n` equidistant phases `k pi / n`.
pub fn equidistant_phases(n: usize) -> Vec<f64> {
    (0..n).map(|k| core::f64::consts::PI * k as f64 / n as f64).collect()
}

/// Splits `total` as evenly as possible over an `i1 x i2` grid, earlier cells
/// taking the remainder.
pub fn uniform_counts(total: usize, i1: usize, i2: usize) -> Vec<Vec<usize>> {
    let cells = i1 * i2;
    (0..i1)
        .map(|i| (0..i2).map(|j| total / cells + usize::from(i * i2 + j < total % cells)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_table_is_normalized_cdf() {
        let m = StateModel::coherent(Complex64::new(1.4, 0.0)).unwrap();
        let s = Sampler::new(&m).unwrap();
        let t = s.marginal_table(0.3).unwrap();
        let mu = SQRT_2 * 1.4 * 0.3f64.cos();
        for &x in &[-1.0, 0.0, 0.7, 2.0] {
            let want = 0.5 * (1.0 + libm::erf(x - mu));
            assert!((t.cdf(x) - want).abs() < 1e-9, "{x}");
        }
        let x = t.sample(0.8);
        assert!((0.5 * (1.0 + libm::erf(x - mu)) - 0.8).abs() < 1e-9);
    }

    #[test]
    fn determinism_and_counts() {
        let m = StateModel::hybrid_cat(Complex64::new(1.0, 0.0)).unwrap();
        let c = uniform_counts(100, 2, 3);
        let a = sample_ensemble(&m, &equidistant_phases(2), &equidistant_phases(3), &c, 9).unwrap();
        let b = sample_ensemble(&m, &equidistant_phases(2), &equidistant_phases(3), &c, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 100);
        assert!(a.is_equidistant());
        let d = sample_ensemble(&m, &equidistant_phases(2), &equidistant_phases(3), &c, 10).unwrap();
        assert_ne!(a, d);
    }
}
