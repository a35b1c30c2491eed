use super::symbol::DyadicSymbol1D;
use crate::error::{Error, Result};
use crate::grid::{convolve, dyadic_dilate, SampledFunction1D, Spectrum1D};

/// Relative size below which a coefficient counts as absent in band checks.
pub const BAND_TOL: f64 = 1e-13;

pub(crate) fn check_safe_band(s: &Spectrum1D, band: (f64, f64)) -> Result<()> {
    if band.0 <= 0.0 && band.1.is_infinite() {
        return Ok(());
    }
    let peak = s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let g = *s.grid();
    for (slot, c) in s.coeffs().iter().enumerate() {
        let r = g.freq(slot).abs();
        if r > 0.0 && (r < band.0 || r > band.1) && c.norm() > BAND_TOL * peak {
            return Err(Error::SafeBand(format!(
                "coefficient at |ξ| = {r} outside safe band [{}, {}]",
                band.0, band.1
            )));
        }
    }
    Ok(())
}

/// `Tf = (m f̂)^∨` with `m` the assembled dyadic symbol.
pub fn apply_linear(sym: &DyadicSymbol1D, f: &SampledFunction1D) -> Result<SampledFunction1D> {
    let s = f.forward_transform();
    check_safe_band(&s, sym.safe_band())?;
    Ok(s.multiply(|xi| sym.eval(xi)).inverse_transform())
}

/// `Σ_j K_j ∗ f` with `K = m₀^∨` sampled on the grid of `f`, each `K_j` obtained by
/// [`dyadic_dilate`] and each term by [`convolve`]. Needs the band of `f` well inside
/// Nyquist (the top dilates are built by spatial index rescaling).
pub fn apply_linear_spatial(sym: &DyadicSymbol1D, f: &SampledFunction1D) -> Result<SampledFunction1D> {
    let g = *f.grid();
    let s = f.forward_transform();
    check_safe_band(&s, sym.safe_band())?;
    let base = g.centered_at(0.0);
    let k = Spectrum1D::from_fn(base, |xi| sym.m0.eval(xi)).inverse_transform();
    let peak = s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut js = std::collections::BTreeSet::new();
    for (slot, c) in s.coeffs().iter().enumerate() {
        let xi = g.freq(slot);
        if xi != 0.0 && c.norm() > BAND_TOL * peak {
            js.extend(sym.terms(xi));
        }
    }
    let mut out = SampledFunction1D::zeros(g);
    for j in js {
        let kj = dyadic_dilate(&k, j)?;
        let term = if g.center() == 0.0 {
            convolve(&kj, f)?
        } else {
            s.zip_with(&kj.forward_transform(), |a, b| a * b)?.inverse_transform()
        };
        out = out.add(&term)?;
    }
    Ok(out)
}
