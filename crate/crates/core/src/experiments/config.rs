//! TOML experiment configuration. Every section and key is optional except
//! `experiment`; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bumps::BumpParams;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub family: FamilySection,
    #[serde(default)]
    pub bumps: BumpSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Dense 1D torus length `L`.
    pub period: f64,
    /// Dense 1D sample count `M`.
    pub samples: usize,
    /// Sphere samples `Q`.
    pub sphere: usize,
    /// 2D kernel grid.
    pub kernel_period: f64,
    pub kernel_samples: usize,
    /// Envelope window samples of the packet route (spacing 1).
    pub envelope: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { period: 1024.0, samples: 1 << 16, sphere: 2048, kernel_period: 64.0, kernel_samples: 1024, envelope: 1 << 14 }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    /// Spacing `c` of the frequencies `2^{ck}`.
    pub c: u32,
    pub n: Vec<u32>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Orlicz exponent used for the level pieces.
    pub a: f64,
    /// Named sphere generator and its parameter.
    pub omega: String,
    pub omega_param: f64,
    /// Optional `(θ, value)` CSV overriding the generator.
    pub omega_csv: Option<PathBuf>,
    pub j_min: i32,
    pub j_max: i32,
    /// Largest `j > 0` of the level table.
    pub table_j: i32,
    /// Random band-limited inputs per sweep.
    pub random_count: usize,
}

impl Default for FamilySection {
    fn default() -> Self {
        Self {
            c: 4,
            n: vec![1, 2, 3, 4, 5],
            y: vec![16.0, 256.0, 4096.0, 65536.0],
            p: vec![2.0, 4.0],
            lambda: vec![1.0, 2.0],
            alpha: vec![0.0, 1.0, 4.0 / 3.0, 2.0],
            a: 1.0,
            omega: "odd-harmonics".into(),
            omega_param: 2.0,
            omega_csv: None,
            j_min: -3,
            j_max: 0,
            table_j: 2,
            random_count: 3,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct BumpSection {
    pub chi_flat: f64,
    pub chi_cut: f64,
    pub eta_radius: f64,
    pub beta: [f64; 4],
}

impl Default for BumpSection {
    fn default() -> Self {
        let d = BumpParams::default();
        Self { chi_flat: d.chi_flat, chi_cut: d.chi_cut, eta_radius: d.eta_radius, beta: d.beta }
    }
}

impl From<&BumpSection> for BumpParams {
    fn from(b: &BumpSection) -> Self {
        BumpParams { chi_flat: b.chi_flat, chi_cut: b.chi_cut, eta_radius: b.eta_radius, beta: b.beta }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
    /// Default configuration for a named experiment.
    pub fn named(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            seed: default_seed(),
            grid: GridSection::default(),
            family: FamilySection::default(),
            bumps: BumpSection::default(),
            output: OutputSection::default(),
        }
    }
}
