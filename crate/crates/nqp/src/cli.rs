//! Subcommands: simulate, reconstruct, analyze, oracle, compare.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use nqp_core::oracle::{nqp_field_with, ORACLE_NODES};
use nqp_core::simulator::{equidistant_phases, sample_ensemble, uniform_counts, EnsembleMetadata};
use nqp_core::{
    assemble_cv_field, assemble_field, build_ensemble, compute_weights, fig_s3_panel, nqp_field, significance_report,
    Binning, Complex64, CvPatternEvaluator, DvPatternEvaluator, FilterKernel, NqpMatrixField, PhaseCorrection,
    PhaseSpaceGrid, StateModel,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config;
use crate::data::{read_samples, sidecar_path, write_samples, ColumnMap, Metadata};
use crate::error::{CliError, Result};
use crate::json::{read_json, write_json, FieldFile, GridJson, SignificanceJson};

#[derive(Parser, Debug)]
#[command(name = "nqp", version, about = "Hybrid CV-DV NQP-matrix reconstruction from homodyne data")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file of flag defaults (keys are flag names; flags override it).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw a synthetic quadrature data set from a catalog state.
    Simulate(SimulateArgs),
    /// Estimate the NQP-matrix field from a data file.
    Reconstruct(ReconstructArgs),
    /// Significance maps, maxima and verdict for a field file.
    Analyze(AnalyzeArgs),
    /// Analytic field of a catalog state, or the W / P_Omega comparison tables.
    Oracle(OracleArgs),
    /// Per-element agreement of a sampled field with an oracle field.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateName {
    Vacuum,
    Coherent,
    Fock,
    Spacs,
    HybridCat,
    Experimental,
    Tmsv,
    DephasedTmsv,
}

#[derive(Args, Clone, Debug)]
pub struct StateArgs {
    #[arg(long, value_enum)]
    pub state: Option<StateName>,
    /// Real part of the coherent amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub beta_im: f64,
    #[arg(long)]
    pub n_photon: Option<usize>,
    /// Squeezing parameter of (dephased) TMSV states, 0 < p < 1.
    #[arg(long)]
    pub p: Option<f64>,
    /// Fock state of the DV mode for single-mode CV states (default vacuum).
    #[arg(long)]
    pub dv_n_photon: Option<usize>,
    /// Transmission of a pure-loss channel on both modes.
    #[arg(long)]
    pub eta: Option<f64>,
}

impl StateArgs {
    fn beta(&self, name: &str) -> Result<Complex64> {
        let re = self.beta.ok_or_else(|| CliError::usage(format!("state {name} needs --beta")))?;
        Ok(Complex64::new(re, self.beta_im))
    }

    fn p(&self, name: &str) -> Result<f64> {
        self.p.ok_or_else(|| CliError::usage(format!("state {name} needs --p")))
    }

    /// The CV-mode state alone, for single-mode catalog entries.
    fn single_mode(&self) -> Result<Option<StateModel>> {
        let name = self.state.ok_or_else(|| CliError::usage("--state is required"))?;
        Ok(match name {
            StateName::Vacuum => Some(StateModel::vacuum()),
            StateName::Coherent => Some(StateModel::coherent(self.beta("coherent")?)?),
            StateName::Fock => {
                Some(StateModel::fock(self.n_photon.ok_or_else(|| CliError::usage("state fock needs --n-photon"))?))
            }
            StateName::Spacs => Some(StateModel::spacs(self.beta("spacs")?)?),
            _ => None,
        })
    }

    /// Two-mode model with optional loss, and its parameters for metadata.
    pub fn build(&self) -> Result<(StateModel, serde_json::Value)> {
        let name = self.state.ok_or_else(|| CliError::usage("--state is required"))?;
        let model = match self.single_mode()? {
            Some(cv) => StateModel::product(cv, StateModel::fock(self.dv_n_photon.unwrap_or(0)))?,
            None => {
                if self.dv_n_photon.is_some() {
                    return Err(CliError::usage("--dv-n-photon applies to single-mode states only"));
                }
                match name {
                    StateName::HybridCat => StateModel::hybrid_cat(self.beta("hybrid-cat")?)?,
                    StateName::Experimental => StateModel::experimental(self.beta("experimental")?)?,
                    StateName::Tmsv => StateModel::tmsv(self.p("tmsv")?)?,
                    StateName::DephasedTmsv => StateModel::dephased_tmsv(self.p("dephased-tmsv")?)?,
                    _ => unreachable!("single-mode states handled above"),
                }
            }
        };
        let model = match self.eta {
            Some(eta) => model.apply_loss(eta)?,
            None => model,
        };
        Ok((model, self.parameters()))
    }

    fn parameters(&self) -> serde_json::Value {
        let mut p = serde_json::Map::new();
        if let Some(b) = self.beta {
            p.insert("beta".into(), json!([b, self.beta_im]));
        }
        if let Some(n) = self.n_photon {
            p.insert("n_photon".into(), json!(n));
        }
        if let Some(v) = self.p {
            p.insert("p".into(), json!(v));
        }
        if let Some(n) = self.dv_n_photon {
            p.insert("dv_n_photon".into(), json!(n));
        }
        if let Some(e) = self.eta {
            p.insert("eta".into(), json!(e));
        }
        serde_json::Value::Object(p)
    }

    fn label(&self) -> String {
        self.state.and_then(|s| s.to_possible_value()).map_or_else(String::new, |v| v.get_name().to_string())
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Phase grid `I1xI2` (equidistant in [0, pi)); `I1` alone means one DV phase.
    #[arg(long, default_value = "6x6")]
    pub phases: String,
    /// Total number of samples, split evenly over the phase pairs.
    #[arg(long)]
    pub n: Option<usize>,
    /// Explicit per-pair counts, row-major over (CV phase, DV phase).
    #[arg(long)]
    pub counts: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; metadata goes to the `.meta.json` sidecar.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    None,
    Bins,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSON; with several widths `_w<w>` is inserted before the extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Filter width(s), comma-separated.
    #[arg(long, default_value = "1.9")]
    pub w: String,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// `re_min,re_max,im_min,im_max,n_re,n_im`.
    #[arg(long, allow_hyphen_values = true, default_value = "-5,5,-5,5,101,101")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    pub phase_correction: CorrectionArg,
    /// Reconstruct only the CV quasiprobability, tracing out the DV mode.
    #[arg(long)]
    pub single_mode: bool,
    /// File columns of each mode, one-based: `cv=1,2 dv=3,4`.
    #[arg(long, num_args = 1..=2, action = ArgAction::Set)]
    pub column_map: Option<Vec<String>>,
    /// Snap phases to an equidistant `I1xI2` grid instead of exact grouping.
    #[arg(long)]
    pub bins: Option<String>,
    /// Largest accepted snapping distance in radians (default: half a bin).
    #[arg(long)]
    pub bin_tolerance: Option<f64>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report JSON (field schema with eigenvalue maps and the verdict).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct OracleArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "1.9")]
    pub w: String,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-5,5,-5,5,101,101")]
    pub grid: String,
    /// CV quasiprobability of a single-mode state (`d = 1`).
    #[arg(long)]
    pub single_mode: bool,
    /// Quadrature nodes per axis (default: chosen from the state and grid, at least 256).
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Write W and P_Omega tables of photon-added coherent states instead.
    #[arg(long)]
    pub fig_s3: bool,
    #[arg(long, default_value = "0,0.9,2.6")]
    pub betas: String,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
pub struct CompareArgs {
    #[arg(long)]
    pub sampled: PathBuf,
    #[arg(long)]
    pub oracle: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Agreement threshold in units of the sampled error.
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::usage(format!("--{what}: expected comma-separated numbers, got '{s}'")))?;
    if v.is_empty() {
        return Err(CliError::usage(format!("--{what} is empty")));
    }
    Ok(v)
}

pub fn parse_grid(s: &str) -> Result<PhaseSpaceGrid> {
    let v = parse_list(s, "grid")?;
    let [a, b, c, d, n1, n2] = v[..] else {
        return Err(CliError::usage("--grid needs re_min,re_max,im_min,im_max,n_re,n_im"));
    };
    if n1.fract() != 0.0 || n2.fract() != 0.0 || n1 < 0.0 || n2 < 0.0 {
        return Err(CliError::usage("grid point counts must be integers"));
    }
    Ok(PhaseSpaceGrid::new(a, b, c, d, n1 as usize, n2 as usize)?)
}

fn parse_phases(s: &str) -> Result<(usize, usize)> {
    let parse = |t: &str| t.trim().parse::<usize>().ok().filter(|&n| n >= 1);
    let r = match s.split_once(['x', 'X']) {
        Some((a, b)) => parse(a).zip(parse(b)),
        None => parse(s).map(|a| (a, 1)),
    };
    r.ok_or_else(|| CliError::usage(format!("phase grid '{s}' is not I1xI2 with positive integers")))
}

fn widths(s: &str) -> Result<Vec<f64>> {
    let w = parse_list(s, "w")?;
    if w.iter().any(|&w| !(w > 0.0)) {
        return Err(CliError::usage("filter widths must be positive"));
    }
    Ok(w)
}

/// `out.json` for a single width, `out_w1.9.json` for each of several.
pub fn width_path(out: &Path, w: f64, several: bool) -> PathBuf {
    if !several {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(e) => format!("{stem}_w{w}.{}", e.to_string_lossy()),
        None => format!("{stem}_w{w}"),
    };
    out.with_file_name(name)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let (model, params) = a.state.build()?;
    let (i1, i2) = parse_phases(&a.phases)?;
    let counts = match &a.counts {
        Some(c) => {
            let flat: Vec<usize> = c
                .split(',')
                .map(|t| t.trim().parse().ok())
                .collect::<Option<_>>()
                .ok_or_else(|| CliError::usage(format!("--counts: expected comma-separated integers, got '{c}'")))?;
            if flat.len() != i1 * i2 {
                return Err(CliError::usage(format!("--counts has {} entries for {i1}x{i2} phase pairs", flat.len())));
            }
            let counts: Vec<Vec<usize>> = flat.chunks(i2).map(<[usize]>::to_vec).collect();
            if let Some(n) = a.n {
                if n != flat.iter().sum::<usize>() {
                    return Err(CliError::usage("--n disagrees with the sum of --counts"));
                }
            }
            counts
        }
        None => uniform_counts(a.n.ok_or_else(|| CliError::usage("simulate needs --n or --counts"))?, i1, i2),
    };
    let (pc, pd) = (equidistant_phases(i1), equidistant_phases(i2));
    let ensemble = sample_ensemble(&model, &pc, &pd, &counts, a.seed)?;
    write_samples(&a.out, &ensemble)?;
    let meta = Metadata::new(&EnsembleMetadata::for_model(&model, a.seed)?, &a.state.label(), params, &pc, &pd, &counts);
    write_json(&sidecar_path(&a.out), &meta)?;
    info!("wrote {} samples over {i1}x{i2} phase pairs to {}", ensemble.total(), a.out.display());
    Ok(())
}

fn reconstruct(a: &ReconstructArgs) -> Result<()> {
    let ws = widths(&a.w)?;
    let grid = parse_grid(&a.grid)?;
    let map = a.column_map.as_deref().map(ColumnMap::parse).transpose()?;
    let samples = read_samples(&a.input, map.as_ref())?;
    let binning = match &a.bins {
        None => Binning::Exact,
        Some(b) => {
            let (i1, i2) = parse_phases(b)?;
            let tol = a.bin_tolerance.unwrap_or(std::f64::consts::PI / (2.0 * i1.max(i2) as f64));
            Binning::Nearest { phases_cv: equidistant_phases(i1), phases_dv: equidistant_phases(i2), tolerance: tol }
        }
    };
    let ensemble = build_ensemble(&samples, &binning)?;
    let weights = compute_weights(&ensemble)?;
    info!(
        "{} samples in {} phase groups ({}x{} phases, equidistant: {}); weight scheme: {}",
        ensemble.total(),
        ensemble.num_groups(),
        ensemble.phases_cv().len(),
        ensemble.phases_dv().len(),
        ensemble.is_equidistant(),
        weights.scheme.name()
    );
    let correction = match a.phase_correction {
        CorrectionArg::None => PhaseCorrection::none(),
        CorrectionArg::Bins => {
            if !ensemble.is_equidistant() {
                warn!("phase bins need equidistant phases; no correction applied");
            }
            PhaseCorrection::bin_average(&ensemble)
        }
    };
    let d = if a.single_mode { 1 } else { a.d };
    let dv = if a.single_mode { None } else { Some(DvPatternEvaluator::new(d)?) };
    for &w in &ws {
        let cv = CvPatternEvaluator::new(FilterKernel::new(w)?)?;
        let field = match &dv {
            Some(dv) => assemble_field(&ensemble, &weights, &cv, dv, &grid, d, correction)?,
            None => assemble_cv_field(&ensemble, &weights, &cv, &grid, correction)?,
        };
        check_finite(&field)?;
        let report = significance_report(&field)?;
        let trace: f64 = (0..d).map(|n| field.integrate_diagonal(n)).sum();
        info!("w = {w}: integrated trace {trace:.4}; {}", report.verdict());
        let mut file = FieldFile::new(&field, &report, false);
        file.weight_scheme = Some(weights.scheme.name().to_string());
        file.phase_correction = Some(format!("{:?}", a.phase_correction).to_lowercase());
        file.single_mode = a.single_mode;
        let path = width_path(&a.out, w, ws.len() > 1);
        write_json(&path, &file)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn check_finite(field: &NqpMatrixField) -> Result<()> {
    let ok = field.values.iter().all(|m| m.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        && field.errors.iter().all(|s| s.data.iter().all(|v| v.is_finite()));
    if ok {
        Ok(())
    } else {
        Err(CliError::numerical("non-finite value in the estimated field"))
    }
}

/// Human-readable summary of a significance report.
pub fn summary(file: &FieldFile, sig: &SignificanceJson) -> String {
    let mut out = format!(
        "w = {}, d = {}, {}x{} grid{}\n",
        file.w,
        file.d,
        file.grid.n_re,
        file.grid.n_im,
        if file.oracle { " (oracle)" } else { "" }
    );
    for kind in ["S", "Sigma"] {
        for n in 0..file.d {
            if let Some(m) = sig.maximum(kind, n) {
                out.push_str(&format!(
                    "max {kind}_{n} = {:>8.3} at alpha = {:.3}{:+.3}i\n",
                    m.value.0, m.alpha[0], m.alpha[1]
                ));
            }
        }
    }
    if let Some(v) = &sig.verdict {
        out.push_str(v);
        out.push('\n');
    }
    out
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    let mut file: FieldFile = read_json(&a.input)?;
    let field = file.to_field()?;
    let report = significance_report(&field)?;
    if report.infinite > 0 {
        warn!("{} significances are infinite (zero error at a nonzero value)", report.infinite);
    }
    let sig = SignificanceJson::from_report(&report, true);
    if sig.degenerate > 0 {
        warn!("{} grid points have a degenerate minimal eigenvalue", sig.degenerate);
    }
    print!("{}", summary(&file, &sig));
    file.significance = sig;
    if let Some(out) = &a.out {
        write_json(out, &file)?;
    }
    Ok(())
}

/// W and P_Omega tables of photon-added coherent states.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonFile {
    pub w: f64,
    pub grid: GridJson,
    pub oracle: bool,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub beta: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub argmin_w: [f64; 2],
    pub ratio_w: f64,
    pub min_p: f64,
    pub max_p: f64,
    pub argmin_p: [f64; 2],
    pub ratio_p: f64,
    /// Per grid point, real part fastest.
    pub wigner: Vec<f64>,
    pub p: Vec<f64>,
}

fn oracle(a: &OracleArgs) -> Result<()> {
    let ws = widths(&a.w)?;
    let grid = parse_grid(&a.grid)?;
    if a.fig_s3 {
        let betas = parse_list(&a.betas, "betas")?;
        for &w in &ws {
            let kernel = FilterKernel::new(w)?;
            let rows = betas
                .iter()
                .map(|&b| {
                    let (r, wig, p) = fig_s3_panel(b, &kernel, &grid)?;
                    Ok(ComparisonRow {
                        beta: b,
                        min_w: r.min_w,
                        max_w: r.max_w,
                        argmin_w: [r.argmin_w.re, r.argmin_w.im],
                        ratio_w: r.ratio_w(),
                        min_p: r.min_p,
                        max_p: r.max_p,
                        argmin_p: [r.argmin_p.re, r.argmin_p.im],
                        ratio_p: r.ratio_p(),
                        wigner: wig,
                        p,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for r in &rows {
                println!("beta = {:.2}: W ratio {:.4}, P_Omega ratio {:.4}", r.beta, r.ratio_w, r.ratio_p);
            }
            let path = width_path(&a.out, w, ws.len() > 1);
            write_json(&path, &ComparisonFile { w, grid: GridJson::from(&grid), oracle: true, rows })?;
        }
        return Ok(());
    }
    let (model, d) = if a.single_mode {
        let m = a.state.single_mode()?.ok_or_else(|| CliError::usage("--single-mode needs a single-mode state"))?;
        let m = match a.state.eta {
            Some(eta) => m.apply_loss(eta)?,
            None => m,
        };
        (m, 1)
    } else {
        (a.state.build()?.0, a.d)
    };
    for &w in &ws {
        let kernel = FilterKernel::new(w)?;
        let field = match a.nodes {
            Some(n) if n >= 16 => nqp_field_with(&model, &kernel, &grid, d, n)?,
            Some(_) => return Err(CliError::usage(format!("--nodes must be at least 16 (default {ORACLE_NODES})"))),
            None => nqp_field(&model, &kernel, &grid, d)?,
        };
        let report = significance_report(&field)?;
        let mut file = FieldFile::new(&field, &report, true);
        file.state = Some(a.state.label());
        file.single_mode = a.single_mode;
        let path = width_path(&a.out, w, ws.len() > 1);
        write_json(&path, &file)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

/// Fraction of grid points where `|sampled - oracle| <= k sigma`, per element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub w: f64,
    pub d: usize,
    pub points: usize,
    pub k: f64,
    /// `fraction[m][n]`.
    pub fraction: Vec<Vec<f64>>,
    pub min_fraction: f64,
}

pub fn agreement(sampled: &FieldFile, oracle: &FieldFile, k: f64) -> Result<Agreement> {
    if sampled.grid != oracle.grid {
        return Err(CliError::data("grids of the two files differ"));
    }
    if sampled.w != oracle.w {
        return Err(CliError::data(format!("filter widths differ: {} vs {}", sampled.w, oracle.w)));
    }
    if sampled.d != oracle.d {
        return Err(CliError::data(format!("matrix dimensions differ: {} vs {}", sampled.d, oracle.d)));
    }
    let (a, b) = (sampled.to_field()?, oracle.to_field()?);
    let d = a.d;
    let mut fraction = vec![vec![0.0; d]; d];
    for (m, row) in fraction.iter_mut().enumerate() {
        for (n, f) in row.iter_mut().enumerate() {
            let hits = a
                .values
                .iter()
                .zip(&b.values)
                .zip(&a.errors)
                .filter(|((x, y), s)| (x.get(m, n) - y.get(m, n)).norm() <= k * s.get(m, n))
                .count();
            *f = hits as f64 / a.values.len() as f64;
        }
    }
    let min_fraction = fraction.iter().flatten().copied().fold(1.0, f64::min);
    Ok(Agreement { w: a.w, d, points: a.values.len(), k, fraction, min_fraction })
}

fn compare(a: &CompareArgs) -> Result<()> {
    let s: FieldFile = read_json(&a.sampled)?;
    let o: FieldFile = read_json(&a.oracle)?;
    let r = agreement(&s, &o, a.k)?;
    for (m, row) in r.fraction.iter().enumerate() {
        for (n, f) in row.iter().enumerate() {
            println!("P_{m}{n}: {:.2}% of {} points within {}σ", 100.0 * f, r.points, r.k);
        }
    }
    println!("minimum agreement {:.2}%", 100.0 * r.min_fraction);
    if let Some(out) = &a.out {
        write_json(out, &r)?;
    }
    Ok(())
}

fn parse(args: &[OsString]) -> std::result::Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

const SUBCOMMANDS: [&str; 5] = ["simulate", "reconstruct", "analyze", "oracle", "compare"];

/// Value of `--config` and the position of the subcommand, found before
/// parsing so that required flags may come from the file.
fn locate_config(args: &[OsString]) -> Option<(PathBuf, usize, &'static str)> {
    let mut config = None;
    let mut sub = None;
    let mut it = args.iter().enumerate().skip(1);
    while let Some((i, a)) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        } else if s == "--config" {
            config = it.next().map(|(_, v)| PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if sub.is_none() {
            sub = SUBCOMMANDS.iter().find(|&&c| c == s).map(|&c| (i, c));
        }
    }
    let (pos, name) = sub?;
    Some((config?, pos, name))
}

/// Parses `args` (program name first), merging the config file, and runs the
/// subcommand.
pub fn run(args: Vec<OsString>) -> Result<()> {
    let cli = match locate_config(&args) {
        None => parse(&args).map_err(clap_error)?,
        Some((path, pos, name)) => {
            let mut merged = args[..=pos].to_vec();
            merged.extend(config::tokens(&path, name)?.into_iter().map(OsString::from));
            merged.extend_from_slice(&args[pos + 1..]);
            parse(&merged).map_err(clap_error)?
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            warn!("thread pool already initialized; --threads ignored");
        }
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Analyze(a) => analyze(a),
        Command::Oracle(a) => oracle(a),
        Command::Compare(a) => compare(a),
    }
}

fn clap_error(e: clap::Error) -> CliError {
    CliError::usage(e.render().to_string())
}

/// Entry point returning the process exit code.
pub fn main(args: Vec<OsString>) -> i32 {
    if let Err(e) = parse(&args) {
        // Help and version requests succeed.
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            return 0;
        }
    }
    match run(args) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.msg.trim_end();
            if msg.starts_with("error:") {
                eprintln!("{msg}");
            } else {
                eprintln!("error: {msg}");
            }
            e.exit_code()
        }
    }
}
