//! Reference values from the normally ordered characteristic function.
//!
//! For the DV matrix element `<m| rho |n>` (a CV operator) the filtered
//! quasiprobability is
//! `P_{m,n}(alpha) = pi^-2 int d^2g Phi_{m,n}(g) Omega(|g|) exp(alpha g* - alpha* g)`,
//! evaluated with a tensor Gauss-Legendre rule on the square where `Omega`
//! is not negligible.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};
use num_complex::Complex64;

use crate::error::{NqpError, Result};
use crate::filter::FilterKernel;
use crate::grid::PhaseSpaceGrid;
use crate::matrix::{CMatrix, NqpMatrixField, RMatrix};
use crate::numeric::quad::gauss_legendre;
use crate::numeric::special::{displacement_element_scaled, ln_factorial};
use crate::state::{CompiledState, DisplacedFock, StateModel};

/// Minimum tensor-rule order per axis.
pub const ORACLE_NODES: usize = 256;
const FOCK_TOL: f64 = 1e-15;
const CONVERGENCE_TOL: f64 = 1e-6;
const OMEGA_CUT: f64 = 1e-20;

/// `coef |ket><bra|`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct OpTerm {
    coef: Complex64,
    ket: DisplacedFock,
    bra: DisplacedFock,
}

impl OpTerm {
    /// `Tr[|ket><bra| D(g)] e^{|g|^2/2}`.
    fn char_fn(&self, g: Complex64) -> Complex64 {
        let b = self.ket.beta;
        let bp = self.bra.beta;
        let z = g + b;
        let ph = (g * b.conj() - g.conj() * b) * 0.5 + (bp.conj() * z - bp * z.conj()) * 0.5;
        let e = displacement_element_scaled(self.bra.n, self.ket.n, z - bp, 0.5 * g.norm_sqr());
        self.coef * e * Complex64::from_polar(1.0, ph.im)
    }

    /// `Tr[|ket><bra| D(a) Pi D(a)^dag]` with the parity `Pi`.
    fn parity(&self, a: Complex64) -> Complex64 {
        let shift = |d: &DisplacedFock| {
            let c = ((a.conj() * d.beta - a * d.beta.conj()) * 0.5).exp();
            (c, d.beta - a)
        };
        let (c1, z1) = shift(&self.ket);
        let (c2, z2) = shift(&self.bra);
        let sign = if self.ket.n % 2 == 0 { 1.0 } else { -1.0 };
        let ov = DisplacedFock::new(z2, self.bra.n).overlap(&DisplacedFock::new(-z1, self.ket.n));
        self.coef * c1 * c2.conj() * ov * sign
    }
}

/// CV operators `<m| rho |n>_DV` of a compiled state, loss included on the DV
/// side; CV loss scales the characteristic-function argument by `sqrt(eta)`.
struct Reduced {
    d: usize,
    eta: f64,
    ops: Vec<Vec<OpTerm>>,
}

fn loss_factor(k: usize, l: usize, j: usize, eta: f64) -> f64 {
    if j == 0 {
        return eta.powf(0.5 * (k + l) as f64);
    }
    if eta == 1.0 {
        return 0.0;
    }
    let lc = |n: usize, r: usize| ln_factorial(n) - ln_factorial(r) - ln_factorial(n - r);
    (0.5 * (lc(k, j) + lc(l, j)) + (0.5 * (k + l) as f64 - j as f64) * eta.ln() + j as f64 * (1.0 - eta).ln()).exp()
}

impl Reduced {
    fn new(state: &CompiledState, d: usize) -> Self {
        let eta = state.eta;
        let mut ops = vec![Vec::new(); d * d];
        for (p, pure) in &state.components {
            let dec = pure.dv_fock_decomposition(FOCK_TOL);
            for m in 0..d {
                for n in 0..d {
                    let op = &mut ops[m * d + n];
                    let mut j = 0;
                    while m + j < dec.len() && n + j < dec.len() {
                        let f = p * loss_factor(m + j, n + j, j, eta);
                        if f > 0.0 {
                            for &(ca, ka) in &dec[m + j] {
                                for &(cb, kb) in &dec[n + j] {
                                    push_merged(op, OpTerm { coef: ca * cb.conj() * f, ket: ka, bra: kb });
                                }
                            }
                        }
                        j += 1;
                    }
                }
            }
        }
        Reduced { d, eta, ops }
    }

    fn char_fn(&self, m: usize, n: usize, g: Complex64) -> Complex64 {
        let g = g * self.eta.sqrt();
        self.ops[m * self.d + n].iter().map(|t| t.char_fn(g)).sum()
    }
}

fn push_merged(op: &mut Vec<OpTerm>, t: OpTerm) {
    match op.iter_mut().find(|o| o.ket == t.ket && o.bra == t.bra) {
        Some(o) => o.coef += t.coef,
        None => op.push(t),
    }
}

/// Transform `pi^-2 int d^2g G(g) exp(alpha g* - alpha* g)` of samples of `G`
/// on a tensor rule, for all points of `grid`.
fn transform(g: &[Complex64], u: &[f64], wt: &[f64], grid: &PhaseSpaceGrid) -> Vec<Complex64> {
    let n = u.len();
    // alpha g* - alpha* g = 2i (b u - a v) for alpha = a + ib, g = u + iv.
    let ea: Vec<Complex64> = (0..grid.n_re)
        .flat_map(|ia| {
            let a = grid.re_at(ia);
            u.iter().zip(wt).map(move |(&uj, &wj)| Complex64::from_polar(wj, -2.0 * a * uj))
        })
        .collect();
    let mut t = vec![Complex64::new(0.0, 0.0); n * grid.n_re];
    for i in 0..n {
        let row = &g[i * n..(i + 1) * n];
        if row.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
            continue;
        }
        for ia in 0..grid.n_re {
            let e = &ea[ia * n..(ia + 1) * n];
            t[i * grid.n_re + ia] = row.iter().zip(e).map(|(x, y)| x * y).sum();
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for ib in 0..grid.n_im {
        let b = grid.im_at(ib);
        let e: Vec<Complex64> = (0..n).map(|i| wt[i] * Complex64::from_polar(1.0, 2.0 * b * u[i])).collect();
        for ia in 0..grid.n_re {
            let s: Complex64 = (0..n).map(|i| e[i] * t[i * grid.n_re + ia]).sum();
            out[ib * grid.n_re + ia] = s / (PI * PI);
        }
    }
    out
}

/// Half-width of the integration square: where `Omega` drops below `OMEGA_CUT`.
fn domain(kernel: &FilterKernel) -> f64 {
    let mut b = 0.0;
    while b < kernel.b_max() && kernel.eval(b) >= OMEGA_CUT {
        b += 0.01;
    }
    b.min(kernel.b_max())
}

/// Rule order resolving the oscillation `exp(alpha g* - alpha* g)` together
/// with the coherent amplitudes of the state.
fn nodes_for(model: &StateModel, kernel: &FilterKernel, grid: &PhaseSpaceGrid) -> Result<usize> {
    let red = Reduced::new(&model.compile()?, 1);
    let beta = red.ops.iter().flatten().map(|t| t.ket.beta.norm().max(t.bra.beta.norm())).fold(0.0, f64::max);
    let k = 2.0 * grid.max_modulus() + 2.0 * beta * red.eta.sqrt();
    Ok(ORACLE_NODES.max((0.75 * k * domain(kernel)).ceil() as usize + 32))
}

/// Analytic filtered NQP matrix field of a catalog state with `nodes` points
/// per axis.
pub fn nqp_field_with(
    model: &StateModel,
    kernel: &FilterKernel,
    grid: &PhaseSpaceGrid,
    d: usize,
    nodes: usize,
) -> Result<NqpMatrixField> {
    if d == 0 {
        return Err(NqpError::param("d must be positive"));
    }
    let red = Reduced::new(&model.compile()?, d);
    let l = domain(kernel);
    let rule = gauss_legendre(nodes).mapped(-l, l);
    let (u, wt) = (&rule.nodes, &rule.weights);
    let n = u.len();
    let omega: Vec<f64> = (0..n * n).map(|k| kernel.eval(Complex64::new(u[k / n], u[k % n]).norm())).collect();
    let mut values = vec![CMatrix::zeros(d); grid.len()];
    for m in 0..d {
        for mm in m..d {
            if red.ops[m * d + mm].is_empty() {
                continue;
            }
            let g: Vec<Complex64> = (0..n * n)
                .map(|k| {
                    if omega[k] == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        omega[k] * red.char_fn(m, mm, Complex64::new(u[k / n], u[k % n]))
                    }
                })
                .collect();
            let p = transform(&g, u, wt, grid);
            for (v, z) in values.iter_mut().zip(p) {
                let z = if m == mm { Complex64::new(z.re, 0.0) } else { z };
                v.set(m, mm, z);
                v.set(mm, m, z.conj());
            }
        }
    }
    let errors = vec![RMatrix::zeros(d); grid.len()];
    NqpMatrixField::new(*grid, d, kernel.w(), values, errors)
}

/// Analytic field on `grid` with the default rule; fails if a coarser rule
/// disagrees at the outermost grid point beyond the relative tolerance.
pub fn nqp_field(model: &StateModel, kernel: &FilterKernel, grid: &PhaseSpaceGrid, d: usize) -> Result<NqpMatrixField> {
    let nodes = nodes_for(model, kernel, grid)?;
    let field = nqp_field_with(model, kernel, grid, d, nodes)?;
    let corner = PhaseSpaceGrid::new(grid.re_max - 1e-3, grid.re_max, grid.im_max - 1e-3, grid.im_max, 2, 2)?;
    let a = nqp_field_with(model, kernel, &corner, d, nodes)?;
    let b = nqp_field_with(model, kernel, &corner, d, nodes * 5 / 4)?;
    let scale = field.values.iter().flat_map(|m| m.data.iter()).fold(0.0f64, |s, z| s.max(z.norm()));
    for (x, y) in a.values.iter().zip(&b.values) {
        for (p, q) in x.data.iter().zip(&y.data) {
            if (p - q).norm() > CONVERGENCE_TOL * scale.max(1e-300) {
                return Err(NqpError::numerical("oracle quadrature did not converge"));
            }
        }
    }
    Ok(field)
}

/// Analytic filtered NQP matrix at a single point.
pub fn nqp_matrix_analytic(model: &StateModel, alpha: Complex64, kernel: &FilterKernel, d: usize) -> Result<CMatrix> {
    let grid = PhaseSpaceGrid::new(alpha.re, alpha.re + 1.0, alpha.im, alpha.im + 1.0, 2, 2)?;
    let nodes = nodes_for(model, kernel, &grid)?;
    Ok(nqp_field_with(model, kernel, &grid, d, nodes)?.values.swap_remove(0))
}

/// Wigner function of a single-mode catalog state, `int W d^2 alpha = 1`.
pub fn wigner(model: &StateModel, alpha: Complex64) -> Result<f64> {
    Ok(wigner_grid(model, &[alpha])?[0])
}

/// Wigner function at several points.
pub fn wigner_grid(model: &StateModel, points: &[Complex64]) -> Result<Vec<f64>> {
    if !model.is_single_mode() {
        return Err(NqpError::param("the Wigner function is defined here for single-mode states"));
    }
    let state = model.compile()?;
    let red = Reduced::new(&state, 1);
    let terms = &red.ops[0];
    if state.eta == 1.0 {
        return Ok(points.iter().map(|&a| FRAC_2_PI * terms.iter().map(|t| t.parity(a)).sum::<Complex64>().re).collect());
    }
    // Lossy: Gaussian-filtered characteristic function.
    let l = 10.0;
    let rule = gauss_legendre(ORACLE_NODES).mapped(-l, l);
    let n = rule.len();
    let mut out = Vec::with_capacity(points.len());
    for &a in points {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let g = Complex64::new(rule.nodes[i], rule.nodes[j]);
                let k = (a * g.conj() - a.conj() * g).exp() * (-0.5 * g.norm_sqr()).exp();
                s += rule.weights[i] * rule.weights[j] * red.char_fn(0, 0, g) * k;
            }
        }
        out.push(s.re / (PI * PI));
    }
    Ok(out)
}

/// Extremes and negativity ratios of `W` and `P_Omega` for `a^dag|beta>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigS3Row {
    pub beta: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub argmin_w: Complex64,
    pub min_p: f64,
    pub max_p: f64,
    pub argmin_p: Complex64,
}

impl FigS3Row {
    /// `|min W| / max W`, zero without negativity.
    pub fn ratio_w(&self) -> f64 {
        (-self.min_w).max(0.0) / self.max_w
    }

    pub fn ratio_p(&self) -> f64 {
        (-self.min_p).max(0.0) / self.max_p
    }
}

/// `W` and `P_Omega` maps of `a^dag|beta>` on `grid` with their extremes.
pub fn fig_s3_panel(beta: f64, kernel: &FilterKernel, grid: &PhaseSpaceGrid) -> Result<(FigS3Row, Vec<f64>, Vec<f64>)> {
    let points = grid.points();
    let model = StateModel::spacs(Complex64::new(beta, 0.0))?;
    let w = wigner_grid(&model, &points)?;
    let p: Vec<f64> = nqp_field(&model, kernel, grid, 1)?.values.iter().map(|m| m.get(0, 0).re).collect();
    let ext = |v: &[f64]| {
        let (mut lo, mut hi, mut arg) = (f64::INFINITY, f64::NEG_INFINITY, 0);
        for (k, &x) in v.iter().enumerate() {
            if x < lo {
                lo = x;
                arg = k;
            }
            hi = hi.max(x);
        }
        (lo, hi, points[arg])
    };
    let (min_w, max_w, argmin_w) = ext(&w);
    let (min_p, max_p, argmin_p) = ext(&p);
    Ok((FigS3Row { beta, min_w, max_w, argmin_w, min_p, max_p, argmin_p }, w, p))
}

/// Extremes of `W` and `P_Omega` for each photon-added coherent state.
pub fn fig_s3_comparison(betas: &[f64], kernel: &FilterKernel, grid: &PhaseSpaceGrid) -> Result<Vec<FigS3Row>> {
    if betas.is_empty() {
        return Err(NqpError::param("empty beta list"));
    }
    betas.iter().map(|&beta| fig_s3_panel(beta, kernel, grid).map(|r| r.0)).collect()
}
