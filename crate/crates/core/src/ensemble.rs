//! Raw quadrature records and their grouping by phase pair.

#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{NqpError, Result};

/// One two-mode homodyne record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSample {
    pub x_cv: f64,
    pub phi_cv: f64,
    pub x_dv: f64,
    pub phi_dv: f64,
}

/// Reduces a phase into [0, pi), flipping the quadrature sign for every odd
/// number of half-turns removed.
pub fn wrap_phase(x: f64, phi: f64) -> (f64, f64) {
    let k = (phi / PI).floor();
    let mut p = phi - k * PI;
    let mut flip = (k as i64).rem_euclid(2) == 1;
    if p >= PI {
        p -= PI;
        flip = !flip;
    }
    if p < 0.0 {
        p = 0.0;
    }
    (if flip { -x } else { x }, p)
}

/// Samples sharing one phase pair, in input order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGroup {
    pub phi_cv: f64,
    pub phi_dv: f64,
    pub x_cv: Vec<f64>,
    pub x_dv: Vec<f64>,
}

impl PhaseGroup {
    pub fn len(&self) -> usize {
        self.x_cv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_cv.is_empty()
    }
}

/// How raw phases are matched to groups.
#[derive(Clone, Debug, PartialEq)]
pub enum Binning {
    /// Group by identical (wrapped) phase values.
    Exact,
    /// Snap each phase to the nearest listed phase, rejecting distances above
    /// `tolerance`. Distances are measured modulo pi.
    Nearest { phases_cv: Vec<f64>, phases_dv: Vec<f64>, tolerance: f64 },
}

/// Data set partitioned into phase-pair groups sorted by `(phi_cv, phi_dv)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGroupedEnsemble {
    groups: Vec<PhaseGroup>,
    phases_cv: Vec<f64>,
    phases_dv: Vec<f64>,
    equidistant: bool,
}

const EQUIDISTANT_TOL: f64 = 1e-9;

fn distinct_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite phases"));
    v.dedup();
    v
}

fn equally_spaced(p: &[f64]) -> bool {
    let step = PI / p.len() as f64;
    p.iter().all(|&x| {
        let r = (x - p[0]) / step;
        (r - r.round()).abs() * step <= EQUIDISTANT_TOL
    }) && p.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= EQUIDISTANT_TOL)
}

impl PhaseGroupedEnsemble {
    /// Builds an ensemble from prepared groups. Phases must lie in [0, pi) and
    /// pairs must be distinct; groups are re-sorted by phase pair.
    pub fn from_groups(mut groups: Vec<PhaseGroup>) -> Result<Self> {
        if groups.is_empty() {
            return Err(NqpError::data("ensemble has no samples"));
        }
        for g in &groups {
            for p in [g.phi_cv, g.phi_dv] {
                if !(0.0..PI).contains(&p) {
                    return Err(NqpError::data(alloc::format!("phase {p} outside [0, pi)")));
                }
            }
            if g.x_cv.len() != g.x_dv.len() {
                return Err(NqpError::data("group has mismatched CV and DV sample counts"));
            }
            if g.len() < 2 {
                return Err(NqpError::data(alloc::format!(
                    "phase group ({}, {}) has {} samples; at least 2 are needed",
                    g.phi_cv,
                    g.phi_dv,
                    g.len()
                )));
            }
            if g.x_cv.iter().chain(&g.x_dv).any(|x| !x.is_finite()) {
                return Err(NqpError::data("non-finite quadrature value"));
            }
        }
        groups.sort_by(|a, b| (a.phi_cv, a.phi_dv).partial_cmp(&(b.phi_cv, b.phi_dv)).expect("finite"));
        if groups.windows(2).any(|w| w[0].phi_cv == w[1].phi_cv && w[0].phi_dv == w[1].phi_dv) {
            return Err(NqpError::data("duplicate phase pair"));
        }
        let phases_cv = distinct_sorted(groups.iter().map(|g| g.phi_cv).collect());
        let phases_dv = distinct_sorted(groups.iter().map(|g| g.phi_dv).collect());
        let equidistant = equally_spaced(&phases_cv) && equally_spaced(&phases_dv);
        Ok(PhaseGroupedEnsemble { groups, phases_cv, phases_dv, equidistant })
    }

    pub fn groups(&self) -> &[PhaseGroup] {
        &self.groups
    }

    /// Number of phase-pair groups `I`.
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(PhaseGroup::len).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.groups.iter().map(PhaseGroup::len).collect()
    }

    /// Distinct CV phases, ascending.
    pub fn phases_cv(&self) -> &[f64] {
        &self.phases_cv
    }

    /// Distinct DV phases, ascending.
    pub fn phases_dv(&self) -> &[f64] {
        &self.phases_dv
    }

    /// True when the distinct phases of each mode are spaced by `pi / I_mode`.
    pub fn is_equidistant(&self) -> bool {
        self.equidistant
    }

    /// Records in group order.
    pub fn samples(&self) -> Vec<QuadratureSample> {
        self.groups
            .iter()
            .flat_map(|g| {
                g.x_cv.iter().zip(&g.x_dv).map(move |(&x_cv, &x_dv)| QuadratureSample {
                    x_cv,
                    phi_cv: g.phi_cv,
                    x_dv,
                    phi_dv: g.phi_dv,
                })
            })
            .collect()
    }
}

fn snap(x: f64, phi: f64, targets: &[f64], tol: f64) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64, bool)> = None;
    for &t in targets {
        for (shift, flip) in [(0.0, false), (PI, true), (-PI, true)] {
            let dist = (phi - (t + shift)).abs();
            if best.is_none_or(|b| dist < b.0) {
                best = Some((dist, t, flip));
            }
        }
    }
    match best {
        Some((dist, t, flip)) if dist <= tol => Ok((if flip { -x } else { x }, t)),
        _ => Err(NqpError::data(alloc::format!("phase {phi} is not within {tol} of any bin"))),
    }
}

/// Groups raw records by phase pair after wrapping phases into [0, pi).
pub fn build_ensemble(samples: &[QuadratureSample], binning: &Binning) -> Result<PhaseGroupedEnsemble> {
    if samples.is_empty() {
        return Err(NqpError::data("no samples"));
    }
    if let Binning::Nearest { phases_cv, phases_dv, tolerance } = binning {
        for p in phases_cv.iter().chain(phases_dv) {
            if !(0.0..PI).contains(p) {
                return Err(NqpError::param(alloc::format!("bin phase {p} outside [0, pi)")));
            }
        }
        if !(*tolerance >= 0.0) {
            return Err(NqpError::param("bin tolerance must be non-negative"));
        }
    }
    let mut groups: Vec<PhaseGroup> = Vec::new();
    // Index of the group for each phase pair, found by binary search on a
    // sorted key list.
    let mut keys: Vec<((f64, f64), usize)> = Vec::new();
    for s in samples {
        if ![s.x_cv, s.phi_cv, s.x_dv, s.phi_dv].iter().all(|v| v.is_finite()) {
            return Err(NqpError::data("non-finite value in sample"));
        }
        let (mut x1, mut p1) = wrap_phase(s.x_cv, s.phi_cv);
        let (mut x2, mut p2) = wrap_phase(s.x_dv, s.phi_dv);
        if let Binning::Nearest { phases_cv, phases_dv, tolerance } = binning {
            (x1, p1) = snap(x1, p1, phases_cv, *tolerance)?;
            (x2, p2) = snap(x2, p2, phases_dv, *tolerance)?;
        }
        let key = (p1, p2);
        let idx = match keys.binary_search_by(|probe| probe.0.partial_cmp(&key).expect("finite")) {
            Ok(i) => keys[i].1,
            Err(i) => {
                groups.push(PhaseGroup { phi_cv: p1, phi_dv: p2, x_cv: Vec::new(), x_dv: Vec::new() });
                keys.insert(i, (key, groups.len() - 1));
                groups.len() - 1
            }
        };
        groups[idx].x_cv.push(x1);
        groups[idx].x_dv.push(x2);
    }
    PhaseGroupedEnsemble::from_groups(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: f64, p1: f64, p2: f64) -> QuadratureSample {
        QuadratureSample { x_cv: x, phi_cv: p1, x_dv: -x, phi_dv: p2 }
    }

    #[test]
    fn exact_grouping() {
        let h = PI / 2.0;
        let e = build_ensemble(&[s(1.0, 0.0, 0.0), s(2.0, 0.0, 0.0), s(3.0, h, 0.0), s(4.0, h, 0.0)], &Binning::Exact).unwrap();
        assert_eq!(e.num_groups(), 2);
        assert_eq!(e.counts(), [2, 2]);
        assert_eq!(e.groups()[1].x_cv, [3.0, 4.0]);
    }

    #[test]
    fn wrapping_flips_sign() {
        let (x, p) = wrap_phase(0.7, PI + 0.1);
        assert!((p - 0.1).abs() < 1e-15);
        assert_eq!(x, -0.7);
        let (x, p) = wrap_phase(0.7, 2.0 * PI + 0.1);
        assert!((p - 0.1).abs() < 1e-14);
        assert_eq!(x, 0.7);
        let (x, p) = wrap_phase(0.7, -0.1);
        assert!((p - (PI - 0.1)).abs() < 1e-15);
        assert_eq!(x, -0.7);
    }

    #[test]
    fn rejects_small_groups() {
        assert!(build_ensemble(&[s(1.0, 0.0, 0.0), s(2.0, 0.0, 0.0), s(3.0, 1.0, 0.0)], &Binning::Exact).is_err());
        assert!(build_ensemble(&[], &Binning::Exact).is_err());
    }

    #[test]
    fn nearest_binning_snaps_across_wrap() {
        let b = Binning::Nearest { phases_cv: alloc::vec![0.0, PI / 2.0], phases_dv: alloc::vec![0.0], tolerance: 0.01 };
        let e = build_ensemble(&[s(1.0, PI - 0.001, 0.0), s(2.0, 0.002, 0.0)], &b).unwrap();
        assert_eq!(e.num_groups(), 1);
        assert_eq!(e.groups()[0].x_cv, [-1.0, 2.0]);
        assert!(build_ensemble(&[s(1.0, 0.5, 0.0), s(1.0, 0.5, 0.0)], &b).is_err());
    }
}
