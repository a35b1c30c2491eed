//! Configuration, registry, deterministic sweeps and table/plot output.

mod config;
mod plot;
mod runners;

use std::path::{Path, PathBuf};

pub use config::{BumpSection, ExperimentConfig, FamilySection, GridSection, OutputSection};
pub use plot::{Plot, Series};

use crate::bumps::{BumpParams, Profiles};
use crate::error::Result;
use crate::extremals::feasibility;
use crate::grid::{fmt, Grid1D};

pub const SCHEMA_VERSION: u32 = 1;

/// `(name, summary)` of every registered experiment.
pub const EXPERIMENTS: [(&str, &str); 7] = [
    ("shifted-square-growth", "ratios ‖S^y f‖_p / ‖S⁰f‖_p against the shift y"),
    ("linear-extremal", "exact identity and L²/L⁴ growth slopes of the linear family"),
    ("bilinear-extremal", "identity 𝓑(f,g) = N·η² and growth of the bilinear family"),
    ("dlambda-scaling", "D_λ of the translated kernel against N"),
    ("drf-mikhlin", "kernel decomposition audit and Mikhlin constants for j ≤ 0"),
    ("level-split-audit", "level pieces of Ω and the (j, μ) norm table"),
    ("orlicz-suite", "Luxemburg L(log L)^α norms of test sphere functions"),
];

pub fn experiment_names() -> impl Iterator<Item = &'static str> {
    EXPERIMENTS.iter().map(|(n, _)| *n)
}

/// One measured quantity. `check` names the tolerance the row is held to
/// (`acceptance-N`, `invariant`, or `report` for unasserted numbers).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub parameters: String,
    pub quantity: String,
    pub value: f64,
    pub fitted: Option<f64>,
    pub residual: Option<f64>,
    pub check: String,
    pub pass: Option<bool>,
}

impl ResultRow {
    pub fn new(parameters: impl Into<String>, quantity: impl Into<String>, value: f64) -> Self {
        Self {
            parameters: parameters.into(),
            quantity: quantity.into(),
            value,
            fitted: None,
            residual: None,
            check: "report".into(),
            pass: None,
        }
    }
    pub fn fit(mut self, fitted: f64, residual: f64) -> Self {
        self.fitted = Some(fitted);
        self.residual = Some(residual);
        self
    }
    pub fn check(mut self, tag: &str, pass: bool) -> Self {
        self.check = tag.into();
        self.pass = Some(pass);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub schema_version: u32,
    pub experiment: String,
    pub rows: Vec<ResultRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

impl ResultTable {
    pub fn new(experiment: &str) -> Self {
        Self { schema_version: SCHEMA_VERSION, experiment: experiment.into(), rows: Vec::new() }
    }
    pub fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }
    /// Rows whose tolerance check failed.
    pub fn breaches(&self) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.pass == Some(false)).collect()
    }
    pub fn find(&self, parameters: &str, quantity: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.parameters == parameters && r.quantity == quantity)
    }
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["schema_version", "experiment", "parameters", "quantity", "value", "fitted", "residual", "check", "pass"])?;
        for r in &self.rows {
            w.write_record([
                self.schema_version.to_string(),
                self.experiment.clone(),
                r.parameters.clone(),
                r.quantity.clone(),
                fmt(r.value),
                opt(r.fitted),
                opt(r.residual),
                r.check.clone(),
                r.pass.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub table: ResultTable,
    pub plots: Vec<Plot>,
}

impl RunOutput {
    /// Writes `<experiment>.csv` and one SVG per plot into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.table.experiment));
        std::fs::write(&csv_path, self.table.to_csv()?)?;
        let mut out = vec![csv_path];
        for p in &self.plots {
            out.push(p.write(dir)?);
        }
        Ok(out)
    }
}

/// Static feasibility report: nothing is computed.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub errors: Vec<String>,
    pub notes: Vec<String>,
    /// Rough peak memory of the largest arrays, bytes.
    pub memory_bytes: f64,
}

const MEMORY_LIMIT: f64 = 8.0 * (1u64 << 30) as f64;

fn uses_extremals(name: &str) -> bool {
    matches!(name, "linear-extremal" | "bilinear-extremal" | "shifted-square-growth")
}

pub fn validate(cfg: &ExperimentConfig) -> ValidationReport {
    let mut errors = Vec::new();
    let mut notes = Vec::new();
    let g = &cfg.grid;
    let f = &cfg.family;
    if !experiment_names().any(|n| n == cfg.experiment) {
        errors.push(format!("unknown experiment `{}`", cfg.experiment));
    }
    if g.sphere < 2 || g.sphere % 2 != 0 {
        errors.push(format!("Q = {} must be even (antipodal pairing of the sphere quadrature)", g.sphere));
    }
    for (what, m) in [("M", g.samples), ("kernel M", g.kernel_samples), ("envelope M", g.envelope)] {
        if m < 8 || !m.is_power_of_two() {
            errors.push(format!("{what} = {m} must be a power of two ≥ 8"));
        }
    }
    for (what, l) in [("L", g.period), ("kernel L", g.kernel_period)] {
        if !(l > 0.0 && l.is_finite()) {
            errors.push(format!("{what} = {l} must be positive"));
        }
    }
    if let Err(e) = BumpParams::from(&cfg.bumps).check() {
        errors.push(e.to_string());
    }
    if f.c == 0 {
        errors.push("spacing c must be positive".into());
    }
    if f.n.is_empty() || f.n.contains(&0) {
        errors.push("N list must be nonempty and positive".into());
    }
    if f.p.iter().any(|&p| !(p >= 1.0)) {
        errors.push("every p must be ≥ 1".into());
    }
    if f.y.iter().any(|y| !y.is_finite()) {
        errors.push("shifts y must be finite".into());
    }
    if f.lambda.iter().chain(&f.alpha).any(|&v| !(v >= 0.0)) || !(f.a >= 0.0) {
        errors.push("λ, α and A must be nonnegative".into());
    }
    if f.j_min > f.j_max {
        errors.push(format!("empty j range [{}, {}]", f.j_min, f.j_max));
    }
    if g.kernel_period > 0.0 && g.kernel_samples.is_power_of_two() {
        let nyq = g.kernel_samples as f64 / (2.0 * g.kernel_period);
        let top = 2.0 * 2f64.powi(f.j_max.max(if cfg.experiment == "level-split-audit" { f.table_j } else { f.j_max }));
        if matches!(cfg.experiment.as_str(), "drf-mikhlin" | "level-split-audit") && top > nyq {
            errors.push(format!("kernel grid Nyquist {nyq} below the top frequency {top} of the j range"));
        }
    }
    if uses_extremals(&cfg.experiment) && g.envelope.is_power_of_two() && f.c > 0 {
        let layout = Grid1D::new(g.envelope as f64, g.envelope).expect("power of two");
        for &n in &f.n {
            let fz = feasibility(n, f.c, &layout);
            if !fz.feasible {
                errors.push(format!(
                    "c = {}, N = {n} is infeasible: a dense grid needs M = 2^{} over L = {}; the packet route needs {:.1} mantissa bits",
                    f.c, fz.dense_samples_log2, fz.dense_period, fz.packet_bits
                ));
            }
        }
    }
    let dense = 8.0 * 16.0 * g.samples as f64;
    let kernel = (f.j_max - f.j_min + 4).max(4) as f64 * 16.0 * (g.kernel_samples as f64).powi(2);
    let memory_bytes = match cfg.experiment.as_str() {
        "drf-mikhlin" | "level-split-audit" => kernel,
        "shifted-square-growth" => dense,
        _ => 64.0 * 16.0 * g.envelope as f64,
    };
    if memory_bytes > MEMORY_LIMIT {
        errors.push(format!("estimated memory {:.1} GiB exceeds the limit", memory_bytes / (1u64 << 30) as f64));
    }
    notes.push(format!("estimated peak memory {:.1} MiB", memory_bytes / (1u64 << 20) as f64));
    ValidationReport { ok: errors.is_empty(), errors, notes, memory_bytes }
}

/// Runs the named experiment. Infeasible `N` values are dropped (and listed
/// in the table) rather than failing the run.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let report = validate(cfg);
    let fatal: Vec<&String> = report.errors.iter().filter(|e| !e.contains("is infeasible")).collect();
    if let Some(e) = fatal.first() {
        return Err(crate::Error::Config((*e).clone()));
    }
    let prof = Profiles::new(BumpParams::from(&cfg.bumps))?;
    match cfg.experiment.as_str() {
        "shifted-square-growth" => runners::shifted_square_growth(cfg, &prof),
        "linear-extremal" => runners::linear_extremal(cfg, &prof),
        "bilinear-extremal" => runners::bilinear_extremal(cfg, &prof),
        "dlambda-scaling" => runners::dlambda_scaling(cfg, &prof),
        "drf-mikhlin" => runners::drf_mikhlin(cfg, &prof),
        "level-split-audit" => runners::level_split_audit(cfg, &prof),
        "orlicz-suite" => runners::orlicz_suite(cfg),
        other => Err(crate::Error::Config(format!("unknown experiment `{other}`"))),
    }
}
