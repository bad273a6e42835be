//! Quadrature data files and their metadata sidecars.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nqp_core::simulator::EnsembleMetadata;
use nqp_core::{PhaseGroupedEnsemble, QuadratureSample};
use serde::{Deserialize, Serialize};

use crate::error::{io_error, CliError, Result};

pub const HEADER: [&str; 4] = ["x_cv", "phi_cv", "x_dv", "phi_dv"];

/// Round-trip exact decimal form (17 significant digits).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Zero-based file columns holding `(x, phi)` of each mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColumnMap {
    pub cv: (usize, usize),
    pub dv: (usize, usize),
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap { cv: (0, 1), dv: (2, 3) }
    }
}

impl ColumnMap {
    /// Parses `cv=1,2 dv=3,4` (one-based `x,phi` columns per mode), given as
    /// one string or as separate tokens.
    pub fn parse<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let joined: Vec<&str> = tokens.iter().flat_map(|t| t.as_ref().split_whitespace()).collect();
        let (mut cv, mut dv) = (None, None);
        for t in joined {
            let (role, cols) = t
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("column map entry '{t}' is not role=x,phi")))?;
            let idx: Vec<usize> = cols
                .split(',')
                .map(|c| c.trim().parse::<usize>().ok().filter(|&c| c >= 1).map(|c| c - 1))
                .collect::<Option<_>>()
                .ok_or_else(|| CliError::usage(format!("bad column list '{cols}' (one-based integers)")))?;
            let [x, phi] = idx[..] else {
                return Err(CliError::usage(format!("column map entry '{t}' needs two columns")));
            };
            match role.trim() {
                "cv" => cv = Some((x, phi)),
                "dv" => dv = Some((x, phi)),
                r => return Err(CliError::usage(format!("unknown mode '{r}' in column map (use cv or dv)"))),
            }
        }
        let (Some(cv), Some(dv)) = (cv, dv) else {
            return Err(CliError::usage("column map must assign both cv and dv"));
        };
        let cols = [cv.0, cv.1, dv.0, dv.1];
        if (0..4).any(|i| cols[i + 1..].contains(&cols[i])) {
            return Err(CliError::usage("column map assigns one column twice"));
        }
        Ok(ColumnMap { cv, dv })
    }

    fn from_header(h: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| {
            h.iter().position(|c| c.trim() == name).ok_or_else(|| {
                CliError::data(format!("header has no column '{name}'; pass --column-map to assign columns"))
            })
        };
        Ok(ColumnMap { cv: (find("x_cv")?, find("phi_cv")?), dv: (find("x_dv")?, find("phi_dv")?) })
    }

    fn width(&self) -> usize {
        [self.cv.0, self.cv.1, self.dv.0, self.dv.1].into_iter().max().unwrap_or(0) + 1
    }
}

/// Reads quadrature records. The first line is a header; without an explicit
/// map, columns are located by the names `x_cv,phi_cv,x_dv,phi_dv`.
pub fn read_samples(path: &Path, map: Option<&ColumnMap>) -> Result<Vec<QuadratureSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let header = rdr.headers().map_err(|e| CliError::data(format!("{}: {e}", path.display())))?.clone();
    let map = match map {
        Some(m) => *m,
        None => ColumnMap::from_header(&header)?,
    };
    let width = map.width();
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(CliError::data(format!("{}:{line}: {e}", path.display())));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < width {
            return Err(CliError::data(format!(
                "{}:{line}: expected at least {width} fields, found {}",
                path.display(),
                record.len()
            )));
        }
        let get = |c: usize| -> Result<f64> {
            let s = &record[c];
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::data(format!("{}:{line}: malformed value '{s}' in column {}", path.display(), c + 1))),
            }
        };
        out.push(QuadratureSample { x_cv: get(map.cv.0)?, phi_cv: get(map.cv.1)?, x_dv: get(map.dv.0)?, phi_dv: get(map.dv.1)? });
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

/// Writes an ensemble group by group in the standard column order.
pub fn write_samples(path: &Path, ensemble: &PhaseGroupedEnsemble) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "{}", HEADER.join(","))?;
        for g in ensemble.groups() {
            let (p1, p2) = (fmt17(g.phi_cv), fmt17(g.phi_dv));
            for (x1, x2) in g.x_cv.iter().zip(&g.x_dv) {
                writeln!(w, "{},{p1},{},{p2}", fmt17(*x1), fmt17(*x2))?;
            }
        }
        w.flush()
    };
    write().map_err(|e| io_error(path, e))
}

/// Provenance of a simulated data file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub state: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub gain: Option<f64>,
    pub transmission: Option<f64>,
    pub eta: f64,
    pub n: usize,
    pub phases_cv: Vec<f64>,
    pub phases_dv: Vec<f64>,
    pub counts: Vec<Vec<usize>>,
}

impl Metadata {
    pub fn new(
        meta: &EnsembleMetadata,
        state: &str,
        parameters: serde_json::Value,
        phases_cv: &[f64],
        phases_dv: &[f64],
        counts: &[Vec<usize>],
    ) -> Self {
        Metadata {
            state: state.to_string(),
            parameters,
            seed: meta.seed,
            gain: meta.gain,
            transmission: meta.transmission,
            eta: meta.eta,
            n: counts.iter().flatten().sum(),
            phases_cv: phases_cv.to_vec(),
            phases_dv: phases_dv.to_vec(),
            counts: counts.to_vec(),
        }
    }
}

/// `data.csv` -> `data.meta.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("meta.json")
}
