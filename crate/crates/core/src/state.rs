//! Catalog of hybrid CV-DV states.
//!
//! Every catalog state is compiled into a mixture of pure components, each a
//! finite sum of terms `c D(b1)|m1> (x) D(b2)|m2>`. This covers coherent, Fock
//! and photon-added states and their superpositions exactly.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use num_complex::Complex64;

use crate::error::{NqpError, Result};
use crate::numeric::quad::gauss_hermite;
use crate::numeric::special::{displacement_element, hermite_functions};

/// Mixture weights below this are dropped when truncating infinite series.
pub const TRUNCATION: f64 = 1e-10;
/// Largest photon number allowed by the truncation of TMSV-type states.
pub const MAX_TRUNCATION_N: usize = 80;

#[derive(Clone, Debug, PartialEq)]
pub enum StateModel {
    Coherent { beta: Complex64 },
    Fock { n: usize },
    /// Normalized single-photon-added coherent state `a^dag |beta>`.
    Spacs { beta: Complex64 },
    /// `(|beta>|0> + |-beta>|1>) / sqrt(2)`.
    HybridCat { beta: Complex64 },
    /// `(|beta>|1> + a^dag|beta>/sqrt(1+|beta|^2) |0>) / sqrt(2)`.
    Experimental { beta: Complex64 },
    /// Two-mode squeezed vacuum `sum_n sqrt((1-p) p^n) |n>|n>`.
    Tmsv { p: f64 },
    /// Phase-randomized TMSV `sum_n (1-p) p^n |n><n| (x) |n><n|`.
    DephasedTmsv { p: f64 },
    Product { cv: Box<StateModel>, dv: Box<StateModel> },
    /// Both modes sent through a pure-loss channel with transmission `eta`.
    Lossy { inner: Box<StateModel>, eta: f64 },
}

fn finite(beta: Complex64) -> Result<Complex64> {
    if beta.re.is_finite() && beta.im.is_finite() {
        Ok(beta)
    } else {
        Err(NqpError::param("amplitude must be finite"))
    }
}

fn squeezing(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(NqpError::param(alloc::format!("p must lie in (0, 1), got {p}")))
    }
}

impl StateModel {
    pub fn coherent(beta: Complex64) -> Result<Self> {
        Ok(StateModel::Coherent { beta: finite(beta)? })
    }

    pub fn fock(n: usize) -> Self {
        StateModel::Fock { n }
    }

    pub fn vacuum() -> Self {
        StateModel::Fock { n: 0 }
    }

    pub fn spacs(beta: Complex64) -> Result<Self> {
        Ok(StateModel::Spacs { beta: finite(beta)? })
    }

    pub fn hybrid_cat(beta: Complex64) -> Result<Self> {
        Ok(StateModel::HybridCat { beta: finite(beta)? })
    }

    pub fn experimental(beta: Complex64) -> Result<Self> {
        Ok(StateModel::Experimental { beta: finite(beta)? })
    }

    pub fn tmsv(p: f64) -> Result<Self> {
        let p = squeezing(p)?;
        truncation_order(p)?;
        Ok(StateModel::Tmsv { p })
    }

    pub fn dephased_tmsv(p: f64) -> Result<Self> {
        let p = squeezing(p)?;
        truncation_order(p)?;
        Ok(StateModel::DephasedTmsv { p })
    }

    /// Product of two single-mode states, the first on the CV mode.
    pub fn product(cv: StateModel, dv: StateModel) -> Result<Self> {
        if !cv.is_single_mode() || !dv.is_single_mode() {
            return Err(NqpError::param("product needs two single-mode states"));
        }
        Ok(StateModel::Product { cv: Box::new(cv), dv: Box::new(dv) })
    }

    /// Pure-loss channel of transmission `eta` on both modes.
    pub fn apply_loss(self, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(NqpError::param(alloc::format!("eta must lie in (0, 1], got {eta}")));
        }
        if eta == 1.0 {
            return Ok(self);
        }
        Ok(match self {
            StateModel::Coherent { beta } => StateModel::Coherent { beta: beta * eta.sqrt() },
            StateModel::Product { cv, dv } => match (*cv, *dv) {
                (StateModel::Coherent { beta: b1 }, StateModel::Coherent { beta: b2 }) => StateModel::Product {
                    cv: Box::new(StateModel::Coherent { beta: b1 * eta.sqrt() }),
                    dv: Box::new(StateModel::Coherent { beta: b2 * eta.sqrt() }),
                },
                (cv, dv) => StateModel::Lossy { inner: Box::new(StateModel::Product { cv: Box::new(cv), dv: Box::new(dv) }), eta },
            },
            StateModel::Lossy { inner, eta: e0 } => StateModel::Lossy { inner, eta: e0 * eta },
            other => StateModel::Lossy { inner: Box::new(other), eta },
        })
    }

    pub fn is_single_mode(&self) -> bool {
        match self {
            StateModel::Coherent { .. } | StateModel::Fock { .. } | StateModel::Spacs { .. } => true,
            StateModel::Lossy { inner, .. } => inner.is_single_mode(),
            _ => false,
        }
    }

    /// Short tag naming the catalog entry.
    pub fn tag(&self) -> &'static str {
        match self {
            StateModel::Coherent { .. } => "coherent",
            StateModel::Fock { .. } => "fock",
            StateModel::Spacs { .. } => "spacs",
            StateModel::HybridCat { .. } => "hybrid_cat",
            StateModel::Experimental { .. } => "experimental",
            StateModel::Tmsv { .. } => "tmsv",
            StateModel::DephasedTmsv { .. } => "dephased_tmsv",
            StateModel::Product { .. } => "product",
            StateModel::Lossy { .. } => "lossy",
        }
    }

    /// Optimal amplitude gain `g = (1 + sqrt(1 + 4/|beta|^2)) / 2` of the
    /// coherent-state approximation, for the experimental state.
    pub fn gain(&self) -> Option<f64> {
        match self {
            StateModel::Experimental { beta } if beta.norm() > 0.0 => Some(0.5 * (1.0 + (1.0 + 4.0 / beta.norm_sqr()).sqrt())),
            StateModel::Lossy { inner, .. } => inner.gain(),
            _ => None,
        }
    }

    /// Interferometer transmission `t = 1/sqrt(|beta|^2 + 2)` that produces the
    /// experimental state.
    pub fn transmission(&self) -> Option<f64> {
        match self {
            StateModel::Experimental { beta } => Some(1.0 / (beta.norm_sqr() + 2.0).sqrt()),
            StateModel::Lossy { inner, .. } => inner.transmission(),
            _ => None,
        }
    }

    pub fn compile(&self) -> Result<CompiledState> {
        let (components, eta) = match self {
            StateModel::Lossy { inner, eta } => {
                let inner = inner.compile()?;
                (inner.components, inner.eta * eta)
            }
            _ => (self.components()?, 1.0),
        };
        let mut out = Vec::with_capacity(components.len());
        let total: f64 = components.iter().map(|c| c.0).sum();
        for (w, mut pure) in components {
            let norm = pure.norm_sqr();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(NqpError::numerical("state component has zero norm"));
            }
            let s = 1.0 / norm.sqrt();
            for t in &mut pure.terms {
                t.coef *= s;
            }
            out.push((w / total, pure));
        }
        Ok(CompiledState { components: out, eta })
    }

    fn single_mode_terms(&self) -> Result<Vec<(Complex64, DisplacedFock)>> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            StateModel::Coherent { beta } => vec![(one, DisplacedFock::new(*beta, 0))],
            StateModel::Fock { n } => vec![(one, DisplacedFock::new(Complex64::new(0.0, 0.0), *n))],
            StateModel::Spacs { beta } => spacs_terms(*beta),
            _ => return Err(NqpError::param("not a pure single-mode state")),
        })
    }

    fn components(&self) -> Result<Vec<(f64, PureState)>> {
        let one = Complex64::new(1.0, 0.0);
        let vac = DisplacedFock::new(Complex64::new(0.0, 0.0), 0);
        let fock = |n| DisplacedFock::new(Complex64::new(0.0, 0.0), n);
        let pure = |terms: Vec<Term>| Ok(vec![(1.0, PureState { terms })]);
        match self {
            StateModel::Coherent { .. } | StateModel::Fock { .. } | StateModel::Spacs { .. } => {
                let terms = self.single_mode_terms()?.into_iter().map(|(c, cv)| Term { coef: c, cv, dv: vac }).collect();
                pure(terms)
            }
            StateModel::HybridCat { beta } => pure(vec![
                Term { coef: one * FRAC_1_SQRT_2, cv: DisplacedFock::new(*beta, 0), dv: fock(0) },
                Term { coef: one * FRAC_1_SQRT_2, cv: DisplacedFock::new(-beta, 0), dv: fock(1) },
            ]),
            StateModel::Experimental { beta } => {
                let mut terms = vec![Term { coef: one * FRAC_1_SQRT_2, cv: DisplacedFock::new(*beta, 0), dv: fock(1) }];
                for (c, cv) in spacs_terms(*beta) {
                    terms.push(Term { coef: c * FRAC_1_SQRT_2, cv, dv: fock(0) });
                }
                pure(terms)
            }
            StateModel::Tmsv { p } => {
                let n_max = truncation_order(*p)?;
                let terms = (0..=n_max)
                    .map(|n| Term { coef: one * ((1.0 - p) * p.powi(n as i32)).sqrt(), cv: fock(n), dv: fock(n) })
                    .collect();
                pure(terms)
            }
            StateModel::DephasedTmsv { p } => {
                let n_max = truncation_order(*p)?;
                Ok((0..=n_max)
                    .map(|n| ((1.0 - p) * p.powi(n as i32), PureState { terms: vec![Term { coef: one, cv: fock(n), dv: fock(n) }] }))
                    .collect())
            }
            StateModel::Product { cv, dv } => {
                let a = cv.compile()?;
                let b = dv.compile()?;
                if a.eta != 1.0 || b.eta != 1.0 {
                    return Err(NqpError::param("apply loss to the product, not to its factors"));
                }
                let mut out = Vec::new();
                for (wa, pa) in &a.components {
                    for (wb, pb) in &b.components {
                        let mut terms = Vec::new();
                        for ta in &pa.terms {
                            for tb in &pb.terms {
                                terms.push(Term { coef: ta.coef * tb.coef, cv: ta.cv, dv: tb.cv });
                            }
                        }
                        out.push((wa * wb, PureState { terms }));
                    }
                }
                Ok(out)
            }
            StateModel::Lossy { .. } => unreachable!("handled in compile"),
        }
    }
}

fn spacs_terms(beta: Complex64) -> Vec<(Complex64, DisplacedFock)> {
    // a^dag D(beta)|0> = D(beta) (|1> + conj(beta)|0>)
    let s = 1.0 / (1.0 + beta.norm_sqr()).sqrt();
    vec![
        (Complex64::new(s, 0.0), DisplacedFock::new(beta, 1)),
        (beta.conj() * s, DisplacedFock::new(beta, 0)),
    ]
}

/// Smallest `n` with `(1-p) p^n < 1e-10`.
pub fn truncation_order(p: f64) -> Result<usize> {
    let mut n = 0;
    while (1.0 - p) * p.powi(n as i32) >= TRUNCATION {
        n += 1;
        if n > MAX_TRUNCATION_N {
            return Err(NqpError::param(alloc::format!(
                "p = {p} needs more than {MAX_TRUNCATION_N} photons for truncation at {TRUNCATION:e}"
            )));
        }
    }
    Ok(n)
}

/// `D(beta)|n>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplacedFock {
    pub beta: Complex64,
    pub n: usize,
}

impl DisplacedFock {
    pub fn new(beta: Complex64, n: usize) -> Self {
        DisplacedFock { beta, n }
    }

    /// `<x|_phi D(beta)|n>` for a quadrature at phase `phi`.
    pub fn amplitude(&self, x: f64, phi: f64) -> Complex64 {
        let g = self.beta * Complex64::from_polar(1.0, -phi);
        let q0 = SQRT_2 * g.re;
        let p0 = SQRT_2 * g.im;
        let chi = hermite_functions(self.n, x - q0)[self.n];
        Complex64::from_polar(chi, -(self.n as f64) * phi - 0.5 * q0 * p0 + p0 * x)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &DisplacedFock) -> Complex64 {
        let a = self.beta;
        let b = other.beta;
        let phase = (a.conj() * b - a * b.conj()) * 0.5;
        phase.exp() * displacement_element(self.n, other.n, b - a)
    }

    /// Fock amplitudes `<k|D(beta)|n>` for `k = 0..` up to where the remaining
    /// weight is below `tol`.
    pub fn fock_expansion(&self, tol: f64) -> Vec<Complex64> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut k = 0;
        loop {
            let v = displacement_element(k, self.n, self.beta);
            acc += v.norm_sqr();
            out.push(v);
            if k >= self.n && 1.0 - acc < tol {
                return out;
            }
            k += 1;
            if k > 400 {
                return out;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coef: Complex64,
    pub cv: DisplacedFock,
    pub dv: DisplacedFock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub terms: Vec<Term>,
}

impl PureState {
    pub fn norm_sqr(&self) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                s += a.coef.conj() * b.coef * a.cv.overlap(&b.cv) * a.dv.overlap(&b.dv);
            }
        }
        s.re
    }

    pub fn amplitude(&self, x1: f64, phi1: f64, x2: f64, phi2: f64) -> Complex64 {
        self.terms.iter().map(|t| t.coef * t.cv.amplitude(x1, phi1) * t.dv.amplitude(x2, phi2)).sum()
    }

    /// DV Fock decomposition: entry `k` lists the CV terms of `<k|_DV Psi>`.
    pub fn dv_fock_decomposition(&self, tol: f64) -> Vec<Vec<(Complex64, DisplacedFock)>> {
        let mut out: Vec<Vec<(Complex64, DisplacedFock)>> = Vec::new();
        for t in &self.terms {
            let amps = if t.dv.beta == Complex64::new(0.0, 0.0) {
                let mut v = vec![Complex64::new(0.0, 0.0); t.dv.n + 1];
                v[t.dv.n] = Complex64::new(1.0, 0.0);
                v
            } else {
                t.dv.fock_expansion(tol)
            };
            if out.len() < amps.len() {
                out.resize(amps.len(), Vec::new());
            }
            for (k, a) in amps.iter().enumerate() {
                if a.norm() > 0.0 {
                    out[k].push((t.coef * a, t.cv));
                }
            }
        }
        out
    }
}

/// Mixture of normalized pure components followed by loss `eta` on both modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledState {
    pub components: Vec<(f64, PureState)>,
    pub eta: f64,
}

impl CompiledState {
    /// Lossless joint density.
    pub fn pure_pdf(&self, x1: f64, phi1: f64, x2: f64, phi2: f64) -> f64 {
        self.components.iter().map(|(w, s)| w * s.amplitude(x1, phi1, x2, phi2).norm_sqr()).sum()
    }
}

const LOSS_NODES: usize = 48;

/// Joint quadrature density `p(x1, x2; phi1, phi2)`.
pub fn joint_pdf(model: &StateModel, x1: f64, phi1: f64, x2: f64, phi2: f64) -> Result<f64> {
    let c = model.compile()?;
    Ok(compiled_pdf(&c, x1, phi1, x2, phi2))
}

/// Joint density of a compiled state; loss enters as a Gauss-Hermite
/// convolution with the vacuum distribution.
pub fn compiled_pdf(c: &CompiledState, x1: f64, phi1: f64, x2: f64, phi2: f64) -> f64 {
    if c.eta == 1.0 {
        return c.pure_pdf(x1, phi1, x2, phi2).max(0.0);
    }
    let r = gauss_hermite(LOSS_NODES);
    let se = c.eta.sqrt();
    let sn = (1.0 - c.eta).sqrt();
    let mut acc = 0.0;
    for (&t1, &w1) in r.nodes.iter().zip(&r.weights) {
        for (&t2, &w2) in r.nodes.iter().zip(&r.weights) {
            acc += w1 * w2 * c.pure_pdf((x1 - sn * t1) / se, phi1, (x2 - sn * t2) / se, phi2);
        }
    }
    (acc / (PI * c.eta)).max(0.0)
}
