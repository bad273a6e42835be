//! JSON field files: NQP matrices, errors and significance maps on a grid.
//!
//! Point `k` of every per-point list is grid point `k`, with the real part of
//! alpha varying fastest. Complex entries are `[re, im]`. Floats are written
//! with 17 significant digits; non-finite significances as the strings
//! `"inf"`, `"-inf"` or `"nan"`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nqp_core::{CMatrix, Complex64, Maximum, NqpMatrixField, PhaseSpaceGrid, RMatrix, SignificanceReport};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, Result};

struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        write!(w, "{v:.16e}")
    }
}

/// Serializes `value` with 17-digit floats.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut ser = serde_json::Serializer::with_formatter(&mut w, Digits17);
    value.serialize(&mut ser).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| io_error(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

/// Float that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Real(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                "nan" => Ok(Real(f64::NAN)),
                _ => Err(de::Error::custom(format!("expected a number or inf/-inf/nan, found '{s}'"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl From<&PhaseSpaceGrid> for GridJson {
    fn from(g: &PhaseSpaceGrid) -> Self {
        GridJson { re_min: g.re_min, re_max: g.re_max, im_min: g.im_min, im_max: g.im_max, n_re: g.n_re, n_im: g.n_im }
    }
}

impl GridJson {
    pub fn to_grid(&self) -> Result<PhaseSpaceGrid> {
        Ok(PhaseSpaceGrid::new(self.re_min, self.re_max, self.im_min, self.im_max, self.n_re, self.n_im)
            .map_err(|e| CliError::data(e.to_string()))?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximumJson {
    /// `"S"` or `"Sigma"`.
    pub kind: String,
    pub n: usize,
    pub value: Real,
    pub alpha: [f64; 2],
    pub index: usize,
}

impl MaximumJson {
    fn new(kind: &str, m: &Maximum) -> Self {
        MaximumJson { kind: kind.to_string(), n: m.n, value: Real(m.value), alpha: [m.alpha.re, m.alpha.im], index: m.index }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceJson {
    /// `S[n][k]`.
    #[serde(rename = "S")]
    pub s: Vec<Vec<Real>>,
    /// `Sigma[n][k]`.
    #[serde(rename = "Sigma")]
    pub sigma: Vec<Vec<Real>>,
    pub maxima: Vec<MaximumJson>,
    /// Minimal eigenvalues `e[n][k]` of the leading submatrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_e: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    /// Count of infinite significances (zero error at a nonzero value).
    #[serde(default)]
    pub infinite: usize,
    /// Count of points with a degenerate minimal eigenvalue.
    #[serde(default)]
    pub degenerate: usize,
}

impl SignificanceJson {
    pub fn from_report(r: &SignificanceReport, detail: bool) -> Self {
        let d = r.d;
        let map = |f: &dyn Fn(usize) -> Vec<f64>| (0..d).map(|n| f(n).into_iter().map(Real).collect()).collect();
        let mut maxima: Vec<MaximumJson> = r.max_s.iter().map(|m| MaximumJson::new("S", m)).collect();
        maxima.extend(r.max_sigma.iter().map(|m| MaximumJson::new("Sigma", m)));
        SignificanceJson {
            s: map(&|n| r.s_map(n)),
            sigma: map(&|n| r.sigma_map(n)),
            maxima,
            e: detail.then(|| (0..d).map(|n| r.points.iter().map(|p| p.e[n]).collect()).collect()),
            sigma_e: detail.then(|| (0..d).map(|n| r.points.iter().map(|p| p.sigma_e[n]).collect()).collect()),
            verdict: Some(r.verdict()),
            infinite: r.infinite,
            degenerate: r.points.iter().filter(|p| p.degenerate.iter().any(|&b| b)).count(),
        }
    }

    /// Recorded maximum of the given kind and order.
    pub fn maximum(&self, kind: &str, n: usize) -> Option<&MaximumJson> {
        self.maxima.iter().find(|m| m.kind == kind && m.n == n)
    }
}

/// On-disk form of an NQP-matrix field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    pub grid: GridJson,
    pub w: f64,
    pub d: usize,
    /// `matrices[k][m][n] = [re, im]`.
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
    /// `errors[k][m][n]`.
    pub errors: Vec<Vec<Vec<f64>>>,
    pub significance: SignificanceJson,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_correction: Option<String>,
    /// The DV mode was traced out (`d = 1` CV quasiprobability).
    #[serde(default)]
    pub single_mode: bool,
}

impl FieldFile {
    pub fn new(field: &NqpMatrixField, report: &SignificanceReport, oracle: bool) -> Self {
        let d = field.d;
        FieldFile {
            grid: GridJson::from(&field.grid),
            w: field.w,
            d,
            matrices: field
                .values
                .iter()
                .map(|m| (0..d).map(|i| (0..d).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect())
                .collect(),
            errors: field
                .errors
                .iter()
                .map(|s| (0..d).map(|i| (0..d).map(|j| s.get(i, j)).collect()).collect())
                .collect(),
            significance: SignificanceJson::from_report(report, false),
            oracle,
            state: None,
            weight_scheme: None,
            phase_correction: None,
            single_mode: false,
        }
    }

    /// Validates shapes and rebuilds the in-memory field.
    pub fn to_field(&self) -> Result<NqpMatrixField> {
        let grid = self.grid.to_grid()?;
        let d = self.d;
        let bad = |what: &str| CliError::data(format!("schema mismatch: {what}"));
        if d == 0 {
            return Err(bad("d must be positive"));
        }
        if self.matrices.len() != grid.len() || self.errors.len() != grid.len() {
            return Err(bad(&format!(
                "{} matrices and {} error matrices for {} grid points",
                self.matrices.len(),
                self.errors.len(),
                grid.len()
            )));
        }
        let square = |lens: Vec<usize>| lens.len() == d && lens.iter().all(|&c| c == d);
        if !self.matrices.iter().all(|m| square(m.iter().map(Vec::len).collect()))
            || !self.errors.iter().all(|m| square(m.iter().map(Vec::len).collect()))
        {
            return Err(bad(&format!("matrices must be {d} x {d}")));
        }
        let values = self.matrices.iter().map(|m| CMatrix::from_fn(d, |i, j| Complex64::new(m[i][j][0], m[i][j][1]))).collect();
        let errors = self
            .errors
            .iter()
            .map(|s| {
                let mut r = RMatrix::zeros(d);
                for i in 0..d {
                    for j in 0..d {
                        r.set(i, j, s[i][j]);
                    }
                }
                r
            })
            .collect();
        NqpMatrixField::new(grid, d, self.w, values, errors).map_err(|e| CliError::data(format!("schema mismatch: {e}")))
    }
}
