//! Rough bilinear kernels `Ω(y/|y|)/|y|²`: sphere functions, level-set
//! splitting, the dyadic decomposition `K^j_k = Γ_{j+k} ∗ K_k`, Mikhlin-type
//! checks and the assembled operator.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bumps::{Profile, Profiles};
use crate::error::{Error, Result};
use crate::extremals::loglog_fit;
use crate::grid::{
    dyadic_dilate_2d, fft_in_place, fmt, read_csv_rows, Grid1D, Grid2D, SampledFunction1D,
    SampledFunction2D, Spectrum1D, Spectrum2D,
};
use crate::norms::{lp_norm, luxemburg_norm, NormReport};
use crate::operators::{apply_bilinear, DyadicSymbol2D, SampledSymbol2D, Symbol2D};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
/// Above this many harmonics a sphere function is interpolated linearly.
const MAX_HARMONICS: usize = 32;

/// `Ω` sampled at `θ_i = 2πi/Q`, normalized measure (weights `1/Q`).
#[derive(Clone, Debug, PartialEq)]
pub struct SphereFunction {
    values: Vec<f64>,
    harmonics: Option<Vec<(i64, C64)>>,
}

impl SphereFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("a sphere function needs at least two samples".into()));
        }
        let harmonics = sparse_harmonics(&values);
        Ok(Self { values, harmonics })
    }
    pub fn from_fn(q: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..q).map(|i| f(2.0 * PI * i as f64 / q as f64)).collect())
    }
    pub fn q(&self) -> usize {
        self.values.len()
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.q() as f64
    }
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.q() as f64
    }
    /// `‖Ω‖_{L¹(dν)}`.
    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.q() as f64
    }
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.values.iter().map(|&v| f(v)).collect()).expect("same length")
    }
    /// `Ω(θ)`: trigonometric interpolation when only a few harmonics are
    /// present, periodic linear interpolation otherwise.
    pub fn eval(&self, theta: f64) -> f64 {
        if let Some(h) = &self.harmonics {
            return h.iter().map(|&(n, c)| (c * C64::from_polar(1.0, n as f64 * theta)).re).sum();
        }
        let q = self.q();
        let t = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * q as f64;
        let i = (t.floor() as usize).min(q - 1);
        let w = t - i as f64;
        self.values[i] * (1.0 - w) + self.values[(i + 1) % q] * w
    }
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["theta", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([fmt(self.theta(i)), fmt(*v)])?;
        }
        w.flush()?;
        Ok(())
    }
    /// Reads `(θ, value)` rows on the uniform angular lattice.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_csv_rows(path, 2)?;
        let q = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if (r[0] - 2.0 * PI * i as f64 / q as f64).abs() > 1e-9 {
                return Err(Error::InvalidGrid(format!("row {i}: θ is off the uniform lattice")));
            }
        }
        Self::new(rows.into_iter().map(|r| r[1]).collect())
    }
}

fn sparse_harmonics(values: &[f64]) -> Option<Vec<(i64, C64)>> {
    let q = values.len();
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);
    let peak = buf.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut out = Vec::new();
    for (s, c) in buf.iter().enumerate() {
        if peak > 0.0 && c.norm() > 1e-13 * peak {
            // Nyquist mode is ambiguous under interpolation
            if q % 2 == 0 && s == q / 2 {
                return None;
            }
            let n = if s <= q / 2 { s as i64 } else { s as i64 - q as i64 };
            out.push((n, c / q as f64));
        }
    }
    (out.len() <= MAX_HARMONICS).then_some(out)
}

/// `‖Ω‖_{L(log L)^α(dν)}`.
pub fn orlicz_norm(omega: &SphereFunction, alpha: f64) -> Result<NormReport> {
    luxemburg_norm(omega.values(), alpha)
}

/// `Ω − ∫Ω dν`.
pub fn project_vanishing(omega: &SphereFunction) -> SphereFunction {
    let m = omega.mean();
    omega.map(|v| v - m)
}

/// `Σ_n (a_n cos nθ + b_n sin nθ)`.
pub fn harmonics(q: usize, terms: &[(u32, f64, f64)]) -> Result<SphereFunction> {
    SphereFunction::from_fn(q, |t| terms.iter().map(|&(n, a, b)| a * (n as f64 * t).cos() + b * (n as f64 * t).sin()).sum())
}

/// `Σ_{odd n ≤ count} cos(nθ)/n`; odd under `θ ↦ θ + π`.
pub fn odd_harmonics(q: usize, count: u32) -> Result<SphereFunction> {
    let terms: Vec<(u32, f64, f64)> = (0..count).map(|i| (2 * i + 1, 1.0 / (2 * i + 1) as f64, 0.0)).collect();
    harmonics(q, &terms)
}

/// Value `high` on an arc of measure `width`, the mean-zero constant elsewhere.
pub fn two_level(q: usize, high: f64, width: f64) -> Result<SphereFunction> {
    let n = ((width * q as f64).round() as usize).clamp(1, q - 1);
    let low = -high * n as f64 / (q - n) as f64;
    SphereFunction::new((0..q).map(|i| if i < n { high } else { low }).collect())
}

/// Spike of height `s` on an arc of measure `1/(s·log(e+s)^a)`, mean removed;
/// `∫|Ω| log^a(e+|Ω|)` stays of order one as `s` grows.
pub fn spike(q: usize, s: f64, a: f64) -> Result<SphereFunction> {
    let width = 1.0 / (s * (std::f64::consts::E + s).ln().powf(a));
    let n = ((width * q as f64).round() as usize).clamp(1, q - 1);
    Ok(project_vanishing(&SphereFunction::new((0..q).map(|i| if i < n { s } else { 0.0 }).collect())?))
}

/// Named generators used by the configuration layer.
pub fn generate(name: &str, q: usize, param: f64) -> Result<SphereFunction> {
    match name {
        "odd-harmonics" => odd_harmonics(q, param.max(1.0) as u32),
        "two-level" => two_level(q, param, 0.25),
        "spike" => spike(q, param, 1.0),
        "cos" => harmonics(q, &[(1, 1.0, 0.0)]),
        "one-plus-cos" => harmonics(q, &[(0, 1.0, 0.0), (1, 1.0, 0.0)]),
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(param as u64);
            Ok(project_vanishing(&SphereFunction::new((0..q).map(|_| rng.gen_range(-1.0..1.0)).collect())?))
        }
        _ => Err(Error::Config(format!("unknown sphere generator `{name}`"))),
    }
}

#[derive(Clone, Debug)]
pub struct LevelSetSplit {
    /// `Ω^μ = Ω χ_{D^μ} − ∫_{D^μ} Ω dν`, only for nonempty `D^μ`.
    pub pieces: BTreeMap<u32, SphereFunction>,
    /// Sample indices of `D^μ`.
    pub sets: BTreeMap<u32, Vec<usize>>,
    /// `∫_{D^μ} |Ω| dν`.
    pub masses: BTreeMap<u32, f64>,
}

/// Level of a value: `D⁰ = {|Ω| ≤ 1}`, `D^μ = {2^{μ−1} < |Ω| ≤ 2^μ}`.
pub fn level_of(v: f64) -> u32 {
    let a = v.abs();
    if a <= 1.0 {
        return 0;
    }
    let mut mu = a.log2().ceil() as u32;
    // guard the rounding of log2 near powers of two
    while 2f64.powi(mu as i32) < a {
        mu += 1;
    }
    while mu > 1 && 2f64.powi(mu as i32 - 1) >= a {
        mu -= 1;
    }
    mu
}

pub fn level_split(omega: &SphereFunction) -> LevelSetSplit {
    let q = omega.q() as f64;
    let mut sets: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &v) in omega.values().iter().enumerate() {
        sets.entry(level_of(v)).or_default().push(i);
    }
    let mut pieces = BTreeMap::new();
    let mut masses = BTreeMap::new();
    for (&mu, idx) in &sets {
        let mass: f64 = idx.iter().map(|&i| omega.values()[i]).sum::<f64>() / q;
        let abs_mass: f64 = idx.iter().map(|&i| omega.values()[i].abs()).sum::<f64>() / q;
        let mut vals = vec![-mass; omega.q()];
        for &i in idx {
            vals[i] += omega.values()[i];
        }
        pieces.insert(mu, SphereFunction::new(vals).expect("nonempty"));
        masses.insert(mu, abs_mass);
    }
    LevelSetSplit { pieces, sets, masses }
}

impl LevelSetSplit {
    pub fn mu_max(&self) -> u32 {
        self.pieces.keys().last().copied().unwrap_or(0)
    }
    /// `Σ_μ Ω^μ`.
    pub fn sum(&self) -> Vec<f64> {
        let q = self.pieces.values().next().map_or(0, SphereFunction::q);
        let mut out = vec![0.0; q];
        for p in self.pieces.values() {
            for (a, b) in out.iter_mut().zip(p.values()) {
                *a += b;
            }
        }
        out
    }
}

/// `ξ ↦ Γ̂(2^{-j}ξ) K̂₀(ξ)`, the symbol of `K^j₀`.
#[derive(Clone, Debug)]
pub struct DrfSymbol {
    pub k0: Arc<SampledSymbol2D>,
    pub gamma: Profile,
    pub j: i32,
}

impl Symbol2D for DrfSymbol {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        let g = self.gamma.eval(xi1.hypot(xi2) * 2f64.powi(-self.j));
        if g == 0.0 {
            return ZERO;
        }
        self.k0.eval_local(xi1, xi2) * g
    }
    fn offset(&self) -> (f64, f64) {
        self.k0.offset()
    }
    fn support(&self) -> (f64, f64) {
        let (a, b) = self.gamma.support();
        let s = 2f64.powi(self.j);
        (a * s, b * s)
    }
}

/// The pieces `K^j₀` on a 2D grid; `K^j_k` are dyadic dilates, built on demand.
#[derive(Clone, Debug)]
pub struct KernelDecomposition {
    pub grid: Grid2D,
    pub omega: SphereFunction,
    pub gamma: Profile,
    /// `K₀(y) = Γ̂(|y|) Ω(y/|y|) / |y|²`.
    pub k0: SampledFunction2D,
    pub k0_hat: Spectrum2D,
    pub pieces: BTreeMap<i32, SampledFunction2D>,
    pub j_range: (i32, i32),
    pub k_range: (i32, i32),
}

/// `K_k(y) = Γ̂(2^k|y|) Ω(y/|y|) / |y|²` sampled on `grid`.
pub fn sample_kk(omega: &SphereFunction, gamma: &Profile, grid: Grid2D, k: i32) -> SampledFunction2D {
    let s = 2f64.powi(k);
    SampledFunction2D::from_fn(grid, |y1, y2| {
        let r = y1.hypot(y2);
        let g = gamma.eval(s * r);
        if g == 0.0 {
            return ZERO;
        }
        C64::new(g * omega.eval(y2.atan2(y1)) / (r * r), 0.0)
    })
}

fn check_ranges(grid: &Grid2D, gamma: &Profile, js: (i32, i32), ks: (i32, i32)) -> Result<()> {
    let (a, b) = gamma.support();
    if js.0 > js.1 || ks.0 > ks.1 {
        return Err(Error::Config("empty j or k range".into()));
    }
    let top = b * 2f64.powi(js.1 + ks.1.max(0));
    if top > grid.nyquist() {
        return Err(Error::Nyquist(format!(
            "K^j_k reaches |ξ| = {top}, above the 2D Nyquist {}",
            grid.nyquist()
        )));
    }
    let reach = 2f64.powi(-ks.0.min(0)) / a;
    if reach >= grid.period() / 2.0 {
        return Err(Error::OutOfRange { k: ks.0, lo: ks.0 + 1, hi: ks.1 });
    }
    Ok(())
}

pub fn drf_decompose(
    omega: &SphereFunction,
    prof: &Profiles,
    grid: Grid2D,
    j_range: (i32, i32),
    k_range: (i32, i32),
) -> Result<KernelDecomposition> {
    let gamma = prof.gamma.clone();
    check_ranges(&grid, &gamma, j_range, k_range)?;
    let grid = grid.centered_at((0.0, 0.0));
    let k0 = sample_kk(omega, &gamma, grid, 0);
    let k0_hat = k0.forward_transform();
    let pieces = (j_range.0..=j_range.1)
        .into_par_iter()
        .map(|j| {
            let s = 2f64.powi(-j);
            let g = gamma.clone();
            (j, k0_hat.multiply(move |a, b| C64::new(g.eval(a.hypot(b) * s), 0.0)).inverse_transform())
        })
        .collect();
    Ok(KernelDecomposition { grid, omega: omega.clone(), gamma, k0, k0_hat, pieces, j_range, k_range })
}

impl KernelDecomposition {
    fn piece0(&self, j: i32) -> Result<&SampledFunction2D> {
        self.pieces.get(&j).ok_or(Error::OutOfRange { k: j, lo: self.j_range.0, hi: self.j_range.1 })
    }
    /// `K^j_k = (K^j₀)_k`.
    pub fn piece(&self, j: i32, k: i32) -> Result<SampledFunction2D> {
        if k < self.k_range.0 || k > self.k_range.1 {
            return Err(Error::OutOfRange { k, lo: self.k_range.0, hi: self.k_range.1 });
        }
        dyadic_dilate_2d(self.piece0(j)?, k)
    }
    /// `Γ_{j+k} ∗ K_k` from a direct sampling of `K_k`.
    pub fn direct_piece(&self, j: i32, k: i32) -> SampledFunction2D {
        let kk = sample_kk(&self.omega, &self.gamma, self.grid, k);
        let s = 2f64.powi(-(j + k));
        let g = self.gamma.clone();
        kk.forward_transform().multiply(move |a, b| C64::new(g.eval(a.hypot(b) * s), 0.0)).inverse_transform()
    }
    /// `max|piece − direct_piece| / max|direct_piece|`.
    pub fn self_similarity_residual(&self, j: i32, k: i32) -> Result<f64> {
        let a = self.piece(j, k)?;
        let b = self.direct_piece(j, k);
        let d = a.zip_with(&b, |x, y| x - y)?;
        Ok(d.max_abs() / b.max_abs().max(f64::MIN_POSITIVE))
    }
    /// Spectral energy of `K^j₀` outside `{2^{j−1} ≤ |ξ| ≤ 2^{j+1}}`, relative.
    pub fn out_of_band(&self, j: i32) -> Result<f64> {
        let s = self.piece0(j)?.forward_transform();
        let g = *s.grid();
        let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j + 1));
        let l = g.period();
        let n = g.samples();
        let (mut out, mut tot) = (0.0, 0.0);
        for i1 in 0..n {
            for i2 in 0..n {
                let e = s.coeffs()[i1 * n + i2].norm_sqr();
                let r = (g.freq_index(i1) as f64 / l).hypot(g.freq_index(i2) as f64 / l);
                tot += e;
                if r < lo * (1.0 - 1e-12) || r > hi * (1.0 + 1e-12) {
                    out += e;
                }
            }
        }
        Ok(if tot > 0.0 { out / tot } else { 0.0 })
    }
    /// `max |Σ_{j} K̂^j₀ − K̂₀| / max|K̂₀|` on the band where the partition is complete.
    pub fn telescoping_residual(&self) -> f64 {
        let g = *self.k0_hat.grid();
        let l = g.period();
        let n = g.samples();
        let (lo, hi) = (2f64.powi(self.j_range.0), 2f64.powi(self.j_range.1));
        let spectra: Vec<Spectrum2D> = self.pieces.values().map(|p| p.forward_transform()).collect();
        let peak = self.k0_hat.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut worst = 0.0f64;
        for i in 0..n * n {
            let r = (g.freq_index(i / n) as f64 / l).hypot(g.freq_index(i % n) as f64 / l);
            if r < lo || r > hi {
                continue;
            }
            let s: C64 = spectra.iter().map(|sp| sp.coeffs()[i]).sum();
            worst = worst.max((s - self.k0_hat.coeffs()[i]).norm());
        }
        worst / peak.max(f64::MIN_POSITIVE)
    }
    /// `‖K^j₀‖_{L¹}`.
    pub fn l1(&self, j: i32) -> Result<f64> {
        let p = self.piece0(j)?;
        let h = self.grid.spacing();
        Ok(p.values().iter().map(|v| v.norm()).sum::<f64>() * h * h)
    }
    /// `K̂₀` at an arbitrary frequency (trapezoid Fourier sum of the samples).
    pub fn k0_symbol(&self) -> Arc<SampledSymbol2D> {
        Arc::new(SampledSymbol2D::new(&self.k0, (0.0, f64::INFINITY)))
    }
    /// `K̂^j = Σ_k K̂^j₀(2^{-k}·)` as a dyadic symbol.
    pub fn symbol_j(&self, j: i32) -> DyadicSymbol2D {
        self.symbol_j_with(self.k0_symbol(), j)
    }
    fn symbol_j_with(&self, k0: Arc<SampledSymbol2D>, j: i32) -> DyadicSymbol2D {
        DyadicSymbol2D::new_unchecked(Arc::new(DrfSymbol { k0, gamma: self.gamma.clone(), j }), None)
    }
}

/// Mikhlin-type constants of one `K^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MikhlinReport {
    pub j: i32,
    /// `(α, sup_ξ |ξ|^{|α|} |∂^α K̂^j(ξ)| / (2^j ‖Ω‖_{L¹}))`.
    pub constants: Vec<((u32, u32), f64)>,
}

impl MikhlinReport {
    pub fn get(&self, a: (u32, u32)) -> Option<f64> {
        self.constants.iter().find(|(b, _)| *b == a).map(|(_, v)| *v)
    }
}

/// Sup over the lattice shell `2^{j−1} ≤ |ξ| ≤ 2^j` (one shell suffices: the
/// weighted derivatives of a dyadic sum are dilation invariant). On that shell
/// `K̂^j(ξ) = K̂^j₀(ξ) + K̂^j₀(2ξ)`; derivatives come from multiplying `K^j₀` by
/// `(−2πiy)^α` before transforming.
pub fn mikhlin_check(dec: &KernelDecomposition, j: i32, alpha_max: u32) -> Result<MikhlinReport> {
    if j > 0 {
        return Err(Error::OutOfRange { k: j, lo: i32::MIN, hi: 0 });
    }
    let piece = dec.piece0(j)?;
    let g = dec.grid;
    let n = g.samples();
    let l = g.period();
    let norm = 2f64.powi(j) * dec.omega.l1();
    let mut alphas = Vec::new();
    for total in 0..=alpha_max {
        for a1 in (0..=total).rev() {
            alphas.push((a1, total - a1));
        }
    }
    let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j));
    let constants = alphas
        .par_iter()
        .map(|&(a1, a2)| {
            let d = SampledFunction2D::from_fn(g, |y1, y2| {
                C64::new(0.0, -2.0 * PI * y1).powu(a1) * C64::new(0.0, -2.0 * PI * y2).powu(a2)
            });
            let spec = piece.zip_with(&d, |u, v| u * v).expect("same grid").forward_transform();
            let order = 2f64.powi((a1 + a2) as i32);
            let mut sup = 0.0f64;
            for i1 in 0..n {
                let m1 = g.freq_index(i1);
                for i2 in 0..n {
                    let m2 = g.freq_index(i2);
                    let r = (m1 as f64 / l).hypot(m2 as f64 / l);
                    if r < lo || r > hi {
                        continue;
                    }
                    let v = spec.coeff(m1, m2) + spec.coeff(2 * m1, 2 * m2) * order;
                    sup = sup.max(r.powi((a1 + a2) as i32) * v.norm());
                }
            }
            ((a1, a2), sup / norm)
        })
        .collect();
    Ok(MikhlinReport { j, constants })
}

/// The `α = 0` constant of [`mikhlin_check`] from direct evaluation of `K̂₀` on
/// a polar sample of the shell; needs no `K^j₀` array, so any `j ≤ 0` works.
pub fn mikhlin_zero_order(dec: &KernelDecomposition, j: i32, radial: usize, angular: usize) -> f64 {
    let sym = dec.k0_symbol();
    let g = &dec.gamma;
    let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j));
    let s = 2f64.powi(-j);
    let sup = (0..radial)
        .into_par_iter()
        .map(|a| {
            let r = lo + (hi - lo) * a as f64 / (radial - 1).max(1) as f64;
            (0..angular)
                .map(|b| {
                    let t = 2.0 * PI * b as f64 / angular as f64;
                    let (x1, x2) = (r * t.cos(), r * t.sin());
                    let v = sym.eval_local(x1, x2) * g.eval(r * s) + sym.eval_local(2.0 * x1, 2.0 * x2) * g.eval(2.0 * r * s);
                    v.norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    sup / (2f64.powi(j) * dec.omega.l1())
}

/// Slope of `log|K̂₀(tω)|` against `log t` for `t` log-spaced in `[t0, t1]`,
/// maximized over a few directions `ω`. Returns `(slope, rms residual)`.
pub fn small_xi_slope(dec: &KernelDecomposition, t0: f64, t1: f64) -> (f64, f64) {
    let sym = dec.k0_symbol();
    let ts: Vec<f64> = (0..9).map(|i| t0 * (t1 / t0).powf(i as f64 / 8.0)).collect();
    let dirs = [0.0, 0.7, 1.9];
    let mags: Vec<f64> = ts
        .par_iter()
        .map(|&t| dirs.iter().map(|&d: &f64| sym.eval_local(t * d.cos(), t * d.sin()).norm()).fold(0.0, f64::max))
        .collect();
    let (s, _, r) = loglog_fit(&ts, &mags);
    (s, r)
}

/// Seeded random band-limited functions on a 1D grid.
#[derive(Clone, Debug)]
pub struct Dictionary {
    pub functions: Vec<SampledFunction1D>,
}

impl Dictionary {
    /// `count` functions with independent Gaussian-like coefficients on
    /// `lo ≤ |m| ≤ hi`, zero elsewhere.
    pub fn random(grid: Grid1D, count: usize, band: (i64, i64), seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let functions = (0..count)
            .map(|_| {
                let mut coeffs = vec![ZERO; grid.samples()];
                for m in band.0..=band.1 {
                    for s in [m, -m] {
                        if let Some(slot) = grid.slot(s) {
                            coeffs[slot] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        }
                    }
                }
                Spectrum1D::new(grid, coeffs).expect("length").inverse_transform()
            })
            .collect();
        Self { functions }
    }
}

/// `max |∫ 𝓑(f₁,f₂) f₃| / (‖f₁‖₂ ‖f₂‖₂ ‖f₃‖_∞)` over consecutive triples of the
/// dictionary: a lower bound for the `L²×L² → L¹` norm.
pub fn estimate_norm(sym: &DyadicSymbol2D, dict: &Dictionary) -> Result<f64> {
    let fs = &dict.functions;
    let triples: Vec<usize> = (0..fs.len().saturating_sub(2)).collect();
    let vals: Vec<f64> = triples
        .par_iter()
        .map(|&i| {
            let (a, b, c) = (&fs[i], &fs[i + 1], &fs[i + 2]);
            let out = apply_bilinear(sym, a, b)?;
            let pair = out.mul(c)?.quadrature(|_| 1.0).norm();
            Ok(pair / (lp_norm(a, 2.0) * lp_norm(b, 2.0) * lp_norm(c, f64::INFINITY)))
        })
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Output of [`apply_t_omega`].
#[derive(Clone, Debug)]
pub struct TOmegaReport {
    pub output: SampledFunction1D,
    /// `(j, ‖T^j(f₁,f₂)‖₂)`.
    pub per_j: Vec<(i32, f64)>,
}

/// `Σ_{j∈range} T^j(f₁,f₂)`, each term through [`apply_bilinear`].
pub fn apply_t_omega(
    dec: &KernelDecomposition,
    f1: &SampledFunction1D,
    f2: &SampledFunction1D,
    js: (i32, i32),
) -> Result<TOmegaReport> {
    let k0 = dec.k0_symbol();
    let terms: Vec<(i32, SampledFunction1D)> = (js.0..=js.1)
        .into_par_iter()
        .map(|j| Ok((j, apply_bilinear(&dec.symbol_j_with(k0.clone(), j), f1, f2)?)))
        .collect::<Result<_>>()?;
    let mut output = SampledFunction1D::zeros(*f1.grid());
    let mut per_j = Vec::new();
    for (j, t) in terms {
        per_j.push((j, lp_norm(&t, 2.0)));
        output = output.add(&t)?;
    }
    Ok(TOmegaReport { output, per_j })
}

/// One cell of the `(j, μ)` table.
#[derive(Clone, Debug, PartialEq)]
pub struct NormCell {
    pub j: i32,
    pub mu: u32,
    /// Dictionary lower bound for `‖T^{j,μ}‖`.
    pub value: f64,
    /// `∫_{D^μ} |Ω| dν`.
    pub mass: f64,
}

/// Per-`(j, μ)` operator-norm estimates for the level pieces of `Ω`.
pub fn level_norm_table(
    omega: &SphereFunction,
    prof: &Profiles,
    grid: Grid2D,
    js: (i32, i32),
    dict: &Dictionary,
) -> Result<Vec<NormCell>> {
    let split = level_split(omega);
    let mut cells = Vec::new();
    for (&mu, piece) in &split.pieces {
        if piece.l1() == 0.0 {
            continue;
        }
        let dec = drf_decompose(piece, prof, grid, (js.0, js.0), (0, 0))?;
        let k0 = dec.k0_symbol();
        for j in js.0..=js.1 {
            let value = estimate_norm(&dec.symbol_j_with(k0.clone(), j), dict)?;
            cells.push(NormCell { j, mu, value, mass: split.masses[&mu] });
        }
    }
    Ok(cells)
}

/// `δ` from `value ∼ 2^{−δ j}` over the cells of one `μ`.
pub fn fit_delta(cells: &[NormCell], mu: u32) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        cells.iter().filter(|c| c.mu == mu && c.value > 0.0).map(|c| (c.j as f64, c.value.log2())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(-sxy / sxx)
}
