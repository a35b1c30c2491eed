//! Littlewood–Paley pieces, shifted pieces, square functions and the
//! Hardy–Littlewood and Peetre maximal operators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::bumps::{Profile, Profiles};
use crate::error::{Error, Result};
use crate::grid::{cis_cycles, Grid1D, SampledFunction1D, Spectrum1D};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Range of `k` for which `p(2^{-k}·)` has an annulus meeting the lattice of
/// `grid` without leaving its Nyquist band.
pub fn admissible_range(grid: &Grid1D, p: &Profile) -> (i32, i32) {
    let (a, b) = p.support();
    let hi = (grid.nyquist() / b).log2().floor() as i32;
    let lo = if a > 0.0 { (1.0 / (grid.period() * b)).log2().ceil() as i32 } else { hi };
    (lo, hi)
}

/// Coefficients below this fraction of the largest count as FFT round-off.
pub const SPECTRAL_FLOOR: f64 = 1e-13;

/// Indices `k` with `p(2^{-k}ξ) ≠ 0` for some coefficient of `s` above the
/// round-off floor.
pub fn nonzero_scales(s: &Spectrum1D, p: &Profile) -> Vec<i32> {
    let g = *s.grid();
    let (a, b) = p.support();
    let floor = SPECTRAL_FLOOR * s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut ks = BTreeSet::new();
    for (slot, c) in s.coeffs().iter().enumerate() {
        let m = g.freq_index(slot);
        if m == 0 || *c == ZERO || c.norm() <= floor {
            continue;
        }
        let r = (m as f64 / g.period()).abs();
        let lo = (r / b).log2().floor() as i32;
        let hi = if a > 0.0 { (r / a).log2().ceil() as i32 } else { lo + 64 };
        for k in lo..=hi {
            if p.eval(r * 2f64.powi(-k)) != 0.0 {
                ks.insert(k);
            }
        }
    }
    ks.into_iter().collect()
}

fn check_k(grid: &Grid1D, p: &Profile, k: i32) -> Result<()> {
    let (lo, hi) = admissible_range(grid, p);
    if k < lo || k > hi {
        return Err(Error::OutOfRange { k, lo, hi });
    }
    Ok(())
}

fn piece_from_spectrum(s: &Spectrum1D, p: &Profile, k: i32, shift: f64) -> SampledFunction1D {
    let sc = 2f64.powi(-k);
    s.multiply(|xi| {
        let v = p.eval(xi * sc);
        if v == 0.0 {
            ZERO
        } else {
            cis_cycles(-xi * shift) * v
        }
    })
    .inverse_transform()
}

/// `ψ_k ∗ f`.
pub fn lp_piece(f: &SampledFunction1D, k: i32, p: &Profiles) -> Result<SampledFunction1D> {
    check_k(f.grid(), &p.psi, k)?;
    Ok(piece_from_spectrum(&f.forward_transform(), &p.psi, k, 0.0))
}

#[derive(Clone, Debug)]
pub struct LPDecomposition {
    pub base: SampledFunction1D,
    pub pieces: BTreeMap<i32, SampledFunction1D>,
    pub k_range: (i32, i32),
    pub c_partition: f64,
}

impl LPDecomposition {
    /// All nonzero pieces of `f`.
    pub fn new(f: &SampledFunction1D, p: &Profiles) -> Self {
        let s = f.forward_transform();
        let ks = nonzero_scales(&s, &p.psi);
        let pieces: BTreeMap<i32, SampledFunction1D> =
            ks.par_iter().map(|&k| (k, piece_from_spectrum(&s, &p.psi, k, 0.0))).collect();
        let k_range = match (ks.first(), ks.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0, -1),
        };
        Self { base: f.clone(), pieces, k_range, c_partition: p.c_partition }
    }
    /// `(1/C) Σ_k ψ_k ∗ f`.
    pub fn reconstruct(&self) -> SampledFunction1D {
        let mut out = SampledFunction1D::zeros(*self.base.grid());
        for piece in self.pieces.values() {
            out = out.add(piece).expect("same grid");
        }
        out.scale(C64::new(1.0 / self.c_partition, 0.0))
    }
    /// `max|reconstruct − (f − mean)| / max|f|`.
    pub fn residual(&self) -> f64 {
        let g = *self.base.grid();
        let mean = self.base.forward_transform().coeff(0) / g.period();
        let r = self.reconstruct();
        let peak = self.base.max_abs().max(f64::MIN_POSITIVE);
        r.values()
            .iter()
            .zip(self.base.values())
            .map(|(a, b)| (a - (b - mean)).norm())
            .fold(0.0, f64::max)
            / peak
    }
}

#[derive(Clone, Debug)]
pub struct ShiftedPiece {
    pub k: i32,
    pub y: f64,
    pub values: SampledFunction1D,
}

fn check_wrap(grid: &Grid1D, k: i32, y: f64) -> Result<f64> {
    let shift = 2f64.powi(-k) * y;
    let limit = grid.period() / 4.0;
    if shift.abs() >= limit {
        return Err(Error::Wrap { shift, limit });
    }
    Ok(shift)
}

/// `(ψ_k)^y ∗ f` with `(ψ_k)^y = ψ_k(· − 2^{-k}y)`.
pub fn shifted_piece(f: &SampledFunction1D, k: i32, y: f64, p: &Profiles) -> Result<ShiftedPiece> {
    check_k(f.grid(), &p.psi, k)?;
    let shift = check_wrap(f.grid(), k, y)?;
    let values = piece_from_spectrum(&f.forward_transform(), &p.psi, k, shift);
    Ok(ShiftedPiece { k, y, values })
}

/// `S^y f = (Σ_k |(ψ_k)^y ∗ f|²)^{1/2}` over the exact nonzero range of `k`.
pub fn square_function(f: &SampledFunction1D, y: f64, p: &Profiles) -> Result<SampledFunction1D> {
    let s = f.forward_transform();
    let ks = nonzero_scales(&s, &p.psi);
    square_function_over(&s, y, p, &ks)
}

/// Square function restricted to the scales `ks`.
pub fn square_function_over(s: &Spectrum1D, y: f64, p: &Profiles, ks: &[i32]) -> Result<SampledFunction1D> {
    let g = *s.grid();
    let shifts: Vec<f64> = ks.iter().map(|&k| check_wrap(&g, k, y)).collect::<Result<_>>()?;
    let pieces: Vec<Vec<f64>> = ks
        .par_iter()
        .zip(shifts.par_iter())
        .map(|(&k, &t)| piece_from_spectrum(s, &p.psi, k, t).values().iter().map(|v| v.norm_sqr()).collect())
        .collect();
    let mut acc = vec![0.0; g.samples()];
    for piece in &pieces {
        for (a, b) in acc.iter_mut().zip(piece) {
            *a += b;
        }
    }
    SampledFunction1D::new(g, acc.into_iter().map(|v| C64::new(v.sqrt(), 0.0)).collect())
}

/// `M_r f(x) = sup_{Q∋x} (avg_Q |f|^r)^{1/r}` over lattice intervals of
/// `2^s` samples, `s = 0..log₂M`, periodic.
pub fn hl_maximal(f: &SampledFunction1D, r: f64) -> Result<SampledFunction1D> {
    if r < 1.0 {
        return Err(Error::Config(format!("maximal exponent r = {r} below 1")));
    }
    let g = *f.grid();
    let m = g.samples();
    let w: Vec<f64> = f.values().iter().map(|v| v.norm().powf(r)).collect();
    let mut prefix = vec![0.0; 2 * m + 1];
    for i in 0..2 * m {
        prefix[i + 1] = prefix[i] + w[i % m];
    }
    let levels: Vec<usize> = (0..=m.trailing_zeros()).map(|s| 1usize << s).collect();
    let per_level: Vec<Vec<f64>> = levels
        .par_iter()
        .map(|&n| {
            // avg over [start, start+n), start ∈ [0, m), extended periodically
            let avg: Vec<f64> = (0..2 * m)
                .map(|st| {
                    let s = st % m;
                    (prefix[s + n] - prefix[s]) / n as f64
                })
                .collect();
            // for x = i, starts run over i-n+1..=i; shift by m to stay positive
            sliding_max(&avg, n, m)
        })
        .collect();
    let values = (0..m)
        .map(|i| {
            let best = per_level.iter().map(|v| v[i]).fold(0.0f64, f64::max);
            C64::new(best.max(0.0).powf(1.0 / r).max(f.values()[i].norm()), 0.0)
        })
        .collect();
    SampledFunction1D::new(g, values)
}

/// `out[i] = max(avg[i+m-n+1 ..= i+m])` for `i < m`.
fn sliding_max(avg: &[f64], n: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    let mut dq: VecDeque<usize> = VecDeque::new();
    let first = m + 1 - n;
    for t in first..2 * m {
        while dq.back().is_some_and(|&b| avg[b] <= avg[t]) {
            dq.pop_back();
        }
        dq.push_back(t);
        while dq.front().is_some_and(|&f| f + n <= t) {
            dq.pop_front();
        }
        if t >= m {
            out[t - m] = avg[*dq.front().expect("nonempty")];
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PeetreMode {
    Exhaustive,
    /// Only offsets where the weight is at least `1e-6` of its maximum.
    Windowed,
}

/// Offset radius (in samples) beyond which the Peetre weight drops under `1e-6`.
pub fn peetre_window(grid: &Grid1D, sigma: f64, k: i32) -> usize {
    let r = (1e6f64.powf(1.0 / sigma) - 1.0) / 2f64.powi(k);
    ((r / grid.spacing()).ceil() as usize).min(grid.samples() / 2)
}

/// `𝔐_{σ,2^k} f(x) = max_y |f(x−y)| / (1 + 2^k|y|)^σ`, `y` over lattice offsets
/// with periodic distance.
pub fn peetre_maximal(f: &SampledFunction1D, sigma: f64, k: i32, mode: PeetreMode) -> Result<SampledFunction1D> {
    if sigma <= 1.0 {
        return Err(Error::Config(format!("Peetre exponent σ = {sigma} must exceed 1")));
    }
    let g = *f.grid();
    let m = g.samples() as i64;
    let h = g.spacing();
    let sc = 2f64.powi(k);
    let abs: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let reach = match mode {
        PeetreMode::Exhaustive => m / 2,
        PeetreMode::Windowed => peetre_window(&g, sigma, k) as i64,
    };
    let weights: Vec<f64> = (0..=m / 2).map(|d| (1.0 + sc * d as f64 * h).powf(-sigma)).collect();
    let values = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut best = abs[i as usize];
            for d in -reach.min(m / 2)..reach.min(m / 2 - 1) + 1 {
                let j = (i - d).rem_euclid(m) as usize;
                let v = abs[j] * weights[d.unsigned_abs() as usize];
                if v > best {
                    best = v;
                }
            }
            C64::new(best, 0.0)
        })
        .collect();
    SampledFunction1D::new(g, values)
}
