//! Frequency-side smooth cutoffs: φ, ψ, ψ̃, ϑ, Γ, η, β.
//!
//! Every profile is a radial function of `r = |ξ|`, real and compactly supported
//! on a stated closed interval. Spatial samples are produced on request by an
//! inverse transform of the lattice values.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D, SampledFunction1D, SampledFunction2D, Spectrum1D, Spectrum2D};

/// `exp(1 - 1/(1-t²))` on `|t| < 1`, zero outside; equals 1 at `t = 0`.
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// C^∞ step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Radial profile `r ↦ p(r)` with a closed support interval `[lo, hi]` in `r`.
#[derive(Clone)]
pub struct Profile {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
}

impl fmt::Debug for Profile {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Profile").field("name", &self.name).field("support", &self.support).finish()
    }
}

impl Profile {
    pub fn new(
        name: impl Into<String>,
        support: (f64, f64),
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), f: Arc::new(f), support }
    }
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn support(&self) -> (f64, f64) {
        self.support
    }
    /// Value at radius `|r|`.
    pub fn eval(&self, r: f64) -> f64 {
        (self.f)(r.abs())
    }
    /// `r ↦ p(2^{-j} r)`.
    pub fn dilate(&self, j: i32) -> Profile {
        let p = self.clone();
        let s = 2f64.powi(j);
        Profile::new(format!("{}_{j}", self.name), (self.support.0 * s, self.support.1 * s), move |r| {
            p.eval(r / s)
        })
    }
    /// Dyadic indices `k` with `p(2^k r)` possibly nonzero.
    pub fn active_scales(&self, r: f64) -> std::ops::RangeInclusive<i32> {
        let r = r.abs();
        let (a, b) = self.support;
        if r == 0.0 || b == 0.0 {
            return 1..=0;
        }
        let lo = if a > 0.0 { (a / r).log2().floor() as i32 } else { -1100 };
        let hi = (b / r).log2().ceil() as i32;
        lo..=hi
    }
    /// `Σ_k p(2^k r)` over every nonzero term.
    pub fn dyadic_sum(&self, r: f64) -> f64 {
        self.active_scales(r).map(|k| self.eval(2f64.powi(k) * r)).sum()
    }
    pub fn sample_1d(&self, grid: Grid1D) -> SampledFunction1D {
        Spectrum1D::from_fn(grid, |xi| C64::new(self.eval(xi), 0.0)).inverse_transform()
    }
    pub fn sample_2d(&self, grid: Grid2D) -> SampledFunction2D {
        Spectrum2D::from_fn(grid, |a, b| C64::new(self.eval(a.hypot(b)), 0.0)).inverse_transform()
    }
}

/// Shape parameters of the family.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpParams {
    /// χ = 1 on `[0, chi_flat]`, 0 beyond `chi_cut`.
    pub chi_flat: f64,
    pub chi_cut: f64,
    /// η̂ supported in `|ξ| ≤ eta_radius`.
    pub eta_radius: f64,
    /// β̂ rises on `[b0, b1]`, equals 1 on `[b1, b2]`, falls on `[b2, b3]`.
    pub beta: [f64; 4],
}

impl Default for BumpParams {
    fn default() -> Self {
        Self {
            chi_flat: 1.0,
            chi_cut: 2.0,
            eta_radius: 0.01,
            beta: [10.0 / 11.0, 20.0 / 21.0, 21.0 / 20.0, 11.0 / 10.0],
        }
    }
}

impl BumpParams {
    pub fn check(&self) -> Result<()> {
        let ok_chi = self.chi_flat > 0.0 && self.chi_cut > self.chi_flat;
        let b = self.beta;
        let ok_beta = 0.0 < b[0] && b[0] < b[1] && b[1] <= b[2] && b[2] < b[3];
        if !ok_chi || !ok_beta || !(self.eta_radius > 0.0) {
            return Err(Error::Config(format!("inconsistent bump parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Bump {
    pub profile: Profile,
    pub spatial: SampledFunction1D,
}

#[derive(Clone, Debug)]
pub struct Bump2D {
    pub profile: Profile,
    pub spatial: SampledFunction2D,
}

/// Analytic profiles plus derived constants.
#[derive(Clone, Debug)]
pub struct Profiles {
    pub params: BumpParams,
    pub phi: Profile,
    pub psi: Profile,
    pub psi_tilde: Profile,
    pub vartheta: Profile,
    pub gamma: Profile,
    pub eta: Profile,
    pub beta: Profile,
    pub c_partition: f64,
    pub k0: i32,
    /// `Σ_k ϑ̂(2^k ξ)`.
    pub theta_sum: f64,
}

fn chi(p: &BumpParams) -> impl Fn(f64) -> f64 + Send + Sync + Clone + 'static {
    let (a, b) = (p.chi_flat, p.chi_cut);
    move |r: f64| 1.0 - smooth_step((r - a) / (b - a))
}

impl Profiles {
    pub fn new(params: BumpParams) -> Result<Self> {
        params.check()?;
        let c = chi(&params);
        let (fl, cut) = (params.chi_flat, params.chi_cut);
        let phi = {
            let c = c.clone();
            Profile::new("phi", (0.0, cut), move |r| c(r))
        };
        let psi = {
            let c = c.clone();
            Profile::new("psi", (0.5 * fl, cut), move |r| c(r) - c(2.0 * r))
        };
        let vartheta = {
            let c = c.clone();
            Profile::new("vartheta", (0.25 * fl, 2.0 * cut), move |r| c(0.5 * r) - c(4.0 * r))
        };
        let gamma = {
            let c = c.clone();
            Profile::new("gamma", (0.5 * fl, cut), move |r| c(r) - c(2.0 * r))
        };
        let er = params.eta_radius;
        let eta = Profile::new("eta", (0.0, er), move |r| bump(r / er));
        let [b0, b1, b2, b3] = params.beta;
        let beta = Profile::new("beta", (b0, b3), move |r| {
            smooth_step((r - b0) / (b1 - b0)) * (1.0 - smooth_step((r - b2) / (b3 - b2)))
        });
        let mut out = Self {
            params,
            phi,
            psi: psi.clone(),
            psi_tilde: psi.clone(),
            vartheta,
            gamma,
            eta,
            beta,
            c_partition: 0.0,
            k0: 0,
            theta_sum: 0.0,
        };
        out.set_psi(psi);
        out.theta_sum = out.vartheta.dyadic_sum(1.0);
        Ok(out)
    }

    /// Replace ψ and rebuild the quantities derived from it (C, k₀, ψ̃).
    pub fn set_psi(&mut self, psi: Profile) {
        let (a, b) = psi.support();
        let c = psi.dyadic_sum(1.0);
        let k0 = ((b / a).log2().ceil() as i32 - 1).max(0);
        let p = psi.clone();
        let psi_tilde = Profile::new("psi_tilde", (a * 2f64.powi(-k0), b * 2f64.powi(k0)), move |r| {
            (-k0..=k0).map(|j| p.eval(r * 2f64.powi(-j))).sum::<f64>() / c
        });
        self.psi = psi;
        self.psi_tilde = psi_tilde;
        self.c_partition = c;
        self.k0 = k0;
    }
}

impl Default for Profiles {
    fn default() -> Self {
        Self::new(BumpParams::default()).expect("default parameters are consistent")
    }
}

/// Profiles plus spatial samples on a 1D grid (and Γ on a 2D grid).
#[derive(Clone, Debug)]
pub struct BumpFamily {
    pub profiles: Profiles,
    pub grid: Grid1D,
    pub grid2: Grid2D,
    /// Largest `j` with `4·2^j` inside the 1D Nyquist band.
    pub j_max: i32,
    pub phi: Bump,
    pub psi: Bump,
    pub psi_tilde: Bump,
    pub vartheta: Bump,
    pub eta: Bump,
    pub beta: Bump,
    pub gamma: Bump2D,
}

impl std::ops::Deref for BumpFamily {
    type Target = Profiles;
    fn deref(&self) -> &Profiles {
        &self.profiles
    }
}

pub fn make_family(grid: Grid1D, grid2: Grid2D) -> Result<BumpFamily> {
    make_family_with(Profiles::default(), grid, grid2)
}

pub fn make_family_with(profiles: Profiles, grid: Grid1D, grid2: Grid2D) -> Result<BumpFamily> {
    let top = profiles.vartheta.support().1;
    if grid.nyquist() < top {
        return Err(Error::Nyquist(format!(
            "1D Nyquist {} below ϑ̂ support edge {top}; need M ≥ {}",
            grid.nyquist(),
            (2.0 * top * grid.period()).ceil()
        )));
    }
    let er = profiles.params.eta_radius;
    if grid.period() * er <= 1.0 {
        return Err(Error::InvalidGrid(format!(
            "period {} too short to resolve η̂ (need L > {})",
            grid.period(),
            1.0 / er
        )));
    }
    let gtop = profiles.gamma.support().1;
    if grid2.nyquist() < gtop {
        return Err(Error::Nyquist(format!(
            "2D Nyquist {} below Γ̂ support edge {gtop}",
            grid2.nyquist()
        )));
    }
    let j_max = (grid.nyquist() / top).log2().floor() as i32;
    let b = |p: &Profile| Bump { profile: p.clone(), spatial: p.sample_1d(grid) };
    Ok(BumpFamily {
        grid,
        grid2,
        j_max,
        phi: b(&profiles.phi),
        psi: b(&profiles.psi),
        psi_tilde: b(&profiles.psi_tilde),
        vartheta: b(&profiles.vartheta),
        eta: b(&profiles.eta),
        beta: b(&profiles.beta),
        gamma: Bump2D { profile: profiles.gamma.clone(), spatial: profiles.gamma.sample_2d(grid2) },
        profiles,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
    fn push(&mut self, name: &str, residual: f64, tolerance: f64) {
        self.checks.push(Check { name: name.into(), residual, tolerance });
    }
}

const TOL: f64 = 1e-8;

/// Evaluation radii: log-spaced points over `[lo, hi]`.
fn radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log2(), hi.log2());
    (0..n).map(|i| 2f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

fn max_outside(p: &Profile, rs: &[f64]) -> f64 {
    let (a, b) = p.support();
    rs.iter().filter(|&&r| r < a || r > b).fold(0.0, |m, &r| m.max(p.eval(r).abs()))
}

pub fn validate_family(fam: &BumpFamily) -> ValidationReport {
    let mut rep = validate_profiles(&fam.profiles, Some(fam.grid));
    let imag = [&fam.phi, &fam.psi, &fam.psi_tilde, &fam.vartheta, &fam.eta, &fam.beta]
        .iter()
        .map(|b| b.spatial.max_imag() / b.spatial.max_abs().max(f64::MIN_POSITIVE))
        .fold(fam.gamma.spatial.max_imag() / fam.gamma.spatial.max_abs(), f64::max);
    rep.push("real_profiles", imag, 1e-12);
    rep
}

/// Checks every family invariant by direct evaluation, on log-spaced radii and,
/// when given, on the positive frequencies of `grid`.
pub fn validate_profiles(p: &Profiles, grid: Option<Grid1D>) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let mut rs = radii(1.0 / 1024.0, 1024.0, 4001);
    if let Some(g) = grid {
        rs.extend((1..g.samples() / 2).map(|m| m as f64 / g.period()));
    }
    rs.push(0.0);

    rep.push("phi_at_zero", (p.phi.eval(0.0) - 1.0).abs(), 1e-12);
    for prof in [&p.phi, &p.psi, &p.psi_tilde, &p.vartheta, &p.gamma, &p.eta, &p.beta] {
        rep.push(&format!("support_{}", prof.name()), max_outside(prof, &rs), TOL);
    }

    let nz: Vec<f64> = rs.iter().copied().filter(|&r| r > 0.0).collect();
    let part = nz.iter().fold(0.0f64, |m, &r| m.max((p.psi.dyadic_sum(r) - p.c_partition).abs()));
    rep.push("psi_partition", part, TOL);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (a, b) = p.psi.support();
    let cdev = (0..100)
        .map(|_| rng.gen_range(a..b))
        .fold(0.0f64, |m, r| m.max((p.psi.dyadic_sum(r) - p.c_partition).abs()));
    rep.push("c_partition_random", cdev, TOL);

    let on_supp: Vec<f64> = nz.iter().copied().filter(|&r| r >= a && r <= b).collect();
    let tilde = on_supp.iter().fold(0.0f64, |m, &r| m.max((p.psi_tilde.eval(r) - 1.0).abs()));
    rep.push("psi_tilde_unit_on_psi_support", tilde, TOL);

    let plateau = |prof: &Profile, lo: f64, hi: f64| {
        let mut pts = radii(lo, hi, 501);
        pts.extend(nz.iter().copied().filter(|&r| r >= lo && r <= hi));
        pts.iter().fold(0.0f64, |m, &r| m.max((prof.eval(r) - 1.0).abs()))
    };
    rep.push("vartheta_plateau", plateau(&p.vartheta, 0.5, 2.0), TOL);
    let tsum = nz.iter().fold(0.0f64, |m, &r| m.max((p.vartheta.dyadic_sum(r) - p.theta_sum).abs()));
    rep.push("vartheta_dyadic_sum", tsum, TOL);

    let tele = radii(1.0 / 16.0, 16.0, 2001)
        .iter()
        .map(|&r| ((-5..=5).map(|k| p.gamma.eval(2f64.powi(-k) * r)).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    rep.push("gamma_telescoping", tele, TOL);

    rep.push("eta_at_zero", (p.eta.eval(0.0) - 1.0).abs(), 1e-12);
    let [_, b1, b2, _] = p.params.beta;
    rep.push("beta_plateau", plateau(&p.beta, b1, b2), TOL);
    rep
}
