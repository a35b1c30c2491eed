use std::sync::{Arc, OnceLock};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::linear::BAND_TOL;
use super::symbol::{DyadicSymbol2D, SampledSymbol2D, Slot, Symbol2D, TRANSPOSE_NORM};
use crate::error::{Error, Result};
use crate::grid::{cis_cycles, Grid2D, SampledFunction1D, SampledFunction2D, Spectrum1D};

/// Indices `m` (centered) of coefficients above `BAND_TOL·peak`.
fn support_indices(s: &Spectrum1D) -> Vec<i64> {
    let peak = s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let g = *s.grid();
    let mut v: Vec<i64> = (0..g.samples())
        .filter(|&slot| peak > 0.0 && s.coeffs()[slot].norm() > BAND_TOL * peak)
        .map(|slot| g.freq_index(slot))
        .collect();
    v.sort_unstable();
    v
}

fn check_inputs(sym: &DyadicSymbol2D, f1: &SampledFunction1D, f2: &SampledFunction1D) -> Result<(Spectrum1D, Spectrum1D)> {
    if f1.grid() != f2.grid() {
        return Err(Error::GridMismatch("bilinear inputs on different grids".into()));
    }
    let g = *f1.grid();
    let quarter = g.samples() as i64 / 4;
    let (s1, s2) = (f1.forward_transform(), f2.forward_transform());
    for (s, name) in [(&s1, "f1"), (&s2, "f2")] {
        if let Some(m) = support_indices(s).into_iter().find(|m| m.abs() >= quarter) {
            return Err(Error::SafeBand(format!(
                "{name} has index {m}; bilinear inputs must stay below M/4 = {quarter}"
            )));
        }
    }
    let (lo, hi) = sym.safe_band();
    if lo > 0.0 || hi.is_finite() {
        let l = g.period();
        for &a in &support_indices(&s1) {
            for &b in &support_indices(&s2) {
                let r = (a as f64 / l).hypot(b as f64 / l);
                if r > 0.0 && (r < lo || r > hi) {
                    return Err(Error::SafeBand(format!("frequency pair radius {r} outside [{lo}, {hi}]")));
                }
            }
        }
    }
    Ok((s1, s2))
}

/// `𝓑(f₁,f₂)(x) = Σ m(ξ₁,ξ₂) f̂₁(ξ₁) f̂₂(ξ₂) e^{2πix(ξ₁+ξ₂)}`.
///
/// The diagonal restriction of the 2D inverse transform equals the 1D inverse
/// transform of the anti-diagonal sums `Σ_{m₁+m₂=n}`, which is what is formed
/// here; inputs must keep their indices inside `(-M/4, M/4)` so no sum aliases.
pub fn apply_bilinear(sym: &DyadicSymbol2D, f1: &SampledFunction1D, f2: &SampledFunction1D) -> Result<SampledFunction1D> {
    let (s1, s2) = check_inputs(sym, f1, f2)?;
    let g = *f1.grid();
    let l = g.period();
    let i1 = support_indices(&s1);
    let i2 = support_indices(&s2);
    if i1.is_empty() || i2.is_empty() {
        return Ok(SampledFunction1D::zeros(g));
    }
    let c2: Vec<C64> = (i2[0]..=i2[i2.len() - 1]).map(|m| s2.coeff(m)).collect();
    let (lo1, hi1) = (i1[0], i1[i1.len() - 1]);
    let (lo2, hi2) = (i2[0], i2[i2.len() - 1]);
    let half = g.samples() as i64 / 2;
    let out: Vec<C64> = (-half..half)
        .into_par_iter()
        .map(|n| {
            let a = lo1.max(n - hi2);
            let b = hi1.min(n - lo2);
            let mut acc = C64::new(0.0, 0.0);
            for m1 in a..=b {
                let m2 = n - m1;
                let v = c2[(m2 - lo2) as usize];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let u = s1.coeff(m1);
                if u == C64::new(0.0, 0.0) {
                    continue;
                }
                acc += sym.eval(m1 as f64 / l, m2 as f64 / l) * u * v;
            }
            acc / l
        })
        .collect();
    let mut spec = vec![C64::new(0.0, 0.0); g.samples()];
    for (k, v) in out.into_iter().enumerate() {
        let n = k as i64 - half;
        spec[g.slot(n).expect("in range")] = v;
    }
    Ok(Spectrum1D::new(g, spec)?.inverse_transform())
}

/// Direct triple loop over `(ξ₁, ξ₂, x)` with direct DFTs of the inputs.
pub fn bilinear_oracle(sym: &DyadicSymbol2D, f1: &SampledFunction1D, f2: &SampledFunction1D) -> Result<SampledFunction1D> {
    let g = *f1.grid();
    if g.samples() > 128 {
        return Err(Error::SizeGuard(format!("oracle needs M ≤ 128, got {}", g.samples())));
    }
    if f2.grid() != &g {
        return Err(Error::GridMismatch("bilinear inputs on different grids".into()));
    }
    let m = g.samples() as i64;
    let l = g.period();
    let h = g.spacing();
    let dft = |f: &SampledFunction1D| -> Vec<C64> {
        (-m / 2..m / 2)
            .map(|k| {
                let xi = k as f64 / l;
                (0..g.samples()).map(|i| f.values()[i] * cis_cycles(-g.x(i) * xi)).sum::<C64>() * h
            })
            .collect()
    };
    let (a, b) = (dft(f1), dft(f2));
    let values = (0..g.samples())
        .map(|i| {
            let x = g.x(i);
            let mut acc = C64::new(0.0, 0.0);
            for (p, &u) in a.iter().enumerate() {
                let xi1 = (p as i64 - m / 2) as f64 / l;
                for (q, &v) in b.iter().enumerate() {
                    let xi2 = (q as i64 - m / 2) as f64 / l;
                    acc += sym.eval(xi1, xi2) * u * v * cis_cycles(x * (xi1 + xi2));
                }
            }
            acc / (l * l)
        })
        .collect();
    SampledFunction1D::new(g, values)
}

/// How [`transpose_kernel`] treats samples whose image leaves the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resample {
    /// Fail if any sample above `1e-12·max|K|` would be lost.
    Reject,
    /// Double the window (same spacing); the image of a square always fits.
    Pad,
}

/// A bilinear kernel: the dyadic symbol plus, optionally, spatial samples of `K = m₀^∨`.
#[derive(Debug)]
pub struct BilinearKernel {
    pub symbol: DyadicSymbol2D,
    pub kernel: Option<SampledFunction2D>,
    transposes: [OnceLock<Arc<BilinearKernel>>; 2],
}

impl Clone for BilinearKernel {
    fn clone(&self) -> Self {
        Self::new(self.symbol.clone(), self.kernel.clone())
    }
}

impl BilinearKernel {
    pub fn new(symbol: DyadicSymbol2D, kernel: Option<SampledFunction2D>) -> Self {
        Self { symbol, kernel, transposes: [OnceLock::new(), OnceLock::new()] }
    }
    /// Kernel given by samples only; `K̂` is the trapezoid Fourier sum.
    pub fn from_samples(kernel: SampledFunction2D, support: (f64, f64)) -> Self {
        let m0: Arc<dyn Symbol2D> = Arc::new(SampledSymbol2D::new(&kernel, support));
        Self::new(DyadicSymbol2D::new_unchecked(m0, None), Some(kernel))
    }
    /// `K^{*1}` or `K^{*2}`, computed once (padding when needed).
    pub fn transpose(&self, slot: Slot) -> Arc<BilinearKernel> {
        let i = match slot {
            Slot::First => 0,
            Slot::Second => 1,
        };
        self.transposes[i]
            .get_or_init(|| {
                Arc::new(transpose_kernel(self, slot, Resample::Pad).expect("padding always fits"))
            })
            .clone()
    }
}

/// `K^{*1}(y) = K(-y₁, -y₁+y₂)`, `K^{*2}(y) = K(y₁-y₂, -y₂)` on the sample lattice.
pub fn transpose_kernel(k: &BilinearKernel, slot: Slot, mode: Resample) -> Result<BilinearKernel> {
    let symbol = k.symbol.transpose(slot);
    let kernel = match &k.kernel {
        None => None,
        Some(kern) => Some(remap(kern, slot, mode)?),
    };
    Ok(BilinearKernel::new(symbol, kernel))
}

/// Samples of `y ↦ K(Ay)`; `A` is unimodular so lattice points map to lattice points.
pub fn remap(kern: &SampledFunction2D, slot: Slot, mode: Resample) -> Result<SampledFunction2D> {
    let g = *kern.grid();
    let h = g.spacing();
    let n = g.samples() as i64;
    let a = slot.matrix();
    let (c1, c2) = g.center();
    let lat = |v: f64| -> Result<i64> {
        let q = v / h;
        if (q - q.round()).abs() > 1e-9 {
            return Err(Error::GridMismatch("kernel window center is off the lattice".into()));
        }
        Ok(q.round() as i64)
    };
    let (o1, o2) = (lat(c1)? - n / 2, lat(c2)? - n / 2);
    // A is an involution, so the image window is centered at A·c.
    let nc = ((a[0][0] * lat(c1)? + a[0][1] * lat(c2)?), (a[1][0] * lat(c1)? + a[1][1] * lat(c2)?));
    let nn = match mode {
        Resample::Reject => n,
        Resample::Pad => 2 * n,
    };
    let grid = Grid2D::new(h * nn as f64, nn as usize)?.centered_at((nc.0 as f64 * h, nc.1 as f64 * h));
    let (p1, p2) = (nc.0 - nn / 2, nc.1 - nn / 2);
    let mut values = vec![C64::new(0.0, 0.0); (nn * nn) as usize];
    let mut hit = vec![false; (n * n) as usize];
    for i1 in 0..nn {
        for i2 in 0..nn {
            let (y1, y2) = (p1 + i1, p2 + i2);
            let (z1, z2) = (a[0][0] * y1 + a[0][1] * y2, a[1][0] * y1 + a[1][1] * y2);
            let (s1, s2) = (z1 - o1, z2 - o2);
            if (0..n).contains(&s1) && (0..n).contains(&s2) {
                let src = (s1 * n + s2) as usize;
                values[(i1 * nn + i2) as usize] = kern.values()[src];
                hit[src] = true;
            }
        }
    }
    if mode == Resample::Reject {
        let peak = kern.max_abs();
        let lost = kern
            .values()
            .iter()
            .zip(&hit)
            .filter(|(_, &h)| !h)
            .fold(0.0f64, |m, (v, _)| m.max(v.norm()));
        if lost > 1e-12 * peak {
            return Err(Error::Support(format!(
                "transpose would drop samples of size {lost:e} (peak {peak:e}); use padding"
            )));
        }
    }
    SampledFunction2D::new(grid, values)
}

/// Bound `c` with `D_λ(K^{*i}) ∈ [D_λ(K)/c, c·D_λ(K)]`: `|Ay| ≤ φ|y|` gives `(1 + ln φ)^λ`.
pub fn transpose_dlambda_factor(lambda: f64) -> f64 {
    (1.0 + TRANSPOSE_NORM.ln()).powf(lambda)
}

/// `∫ f g dx` (bilinear, no conjugation).
pub fn pairing(f: &SampledFunction1D, g: &SampledFunction1D) -> Result<C64> {
    Ok(f.mul(g)?.quadrature(|_| 1.0))
}
