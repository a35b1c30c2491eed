//! `L^p`, Hardy, dyadic BMO, Luxemburg `L(log L)^α` and the weighted kernel
//! functional `D_λ`.

use std::f64::consts::E;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::nonzero_scales;
use crate::bumps::Profiles;
use crate::error::{Error, Result};
use crate::grid::{fmt as fnum, SampledFunction1D, SampledFunction2D};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Lp,
    Hp,
    Bmo,
    Orlicz,
    Dlambda,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Lp => "Lp",
            NormKind::Hp => "Hp",
            NormKind::Bmo => "BMO",
            NormKind::Orlicz => "Orlicz",
            NormKind::Dlambda => "Dlambda",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub kind: NormKind,
    pub parameter: f64,
    pub value: f64,
    /// Free-form notes: truncation ranges, warnings, maximizers.
    pub diagnostics: Vec<String>,
    pub iterations: Option<usize>,
}

impl NormReport {
    fn new(kind: NormKind, parameter: f64, value: f64) -> Self {
        Self { kind, parameter, value, diagnostics: Vec::new(), iterations: None }
    }
}

/// `(kind, parameter, value)` rows.
pub fn write_norm_reports(path: &Path, reports: &[NormReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "parameter", "value"])?;
    for r in reports {
        w.write_record([r.kind.to_string(), fnum(r.parameter), fnum(r.value)])?;
    }
    w.flush()?;
    Ok(())
}

fn lp_of(abs: impl Iterator<Item = f64>, measure: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return abs.fold(0.0, f64::max);
    }
    (abs.map(|a| a.powf(p)).sum::<f64>() * measure).powf(1.0 / p)
}

/// `(h Σ |f|^p)^{1/p}`; `p = ∞` is the grid maximum.
pub fn lp_norm(f: &SampledFunction1D, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be ≥ 1");
    lp_of(f.values().iter().map(|v| v.norm()), f.grid().spacing(), p)
}

pub fn lp_norm_2d(f: &SampledFunction2D, p: f64) -> f64 {
    assert!(p >= 1.0, "p must be ≥ 1");
    let h = f.grid().spacing();
    lp_of(f.values().iter().map(|v| v.norm()), h * h, p)
}

/// `sup_k |φ_k ∗ f|` over the finite range where the pieces change; below it
/// only the mean survives, above it `φ_k ∗ f = f`.
pub fn hardy_maximal(f: &SampledFunction1D, p: &Profiles) -> (SampledFunction1D, (i32, i32)) {
    let g = *f.grid();
    let s = f.forward_transform();
    let (flat, cut) = (p.params.chi_flat, p.params.chi_cut);
    let band = s.band_index(0.0) as f64 / g.period();
    let lo = (1.0 / (g.period() * cut)).log2().floor() as i32 - 1;
    let hi = if band > 0.0 { (band / flat).log2().ceil() as i32 + 1 } else { lo };
    let pieces: Vec<Vec<f64>> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let sc = 2f64.powi(-k);
            s.multiply(|xi| num_complex::Complex64::new(p.phi.eval(xi * sc), 0.0))
                .inverse_transform()
                .values()
                .iter()
                .map(|v| v.norm())
                .collect()
        })
        .collect();
    let mut sup = vec![0.0f64; g.samples()];
    for piece in &pieces {
        for (a, b) in sup.iter_mut().zip(piece) {
            *a = a.max(*b);
        }
    }
    let values = sup.into_iter().map(|v| num_complex::Complex64::new(v, 0.0)).collect();
    (SampledFunction1D::new(g, values).expect("length"), (lo, hi))
}

/// `‖sup_k |φ_k ∗ f|‖_p`; `p = ∞` is routed to [`bmo_norm`].
pub fn hardy_norm(f: &SampledFunction1D, p: f64, prof: &Profiles) -> Result<NormReport> {
    if p.is_infinite() {
        let mut r = bmo_norm(f, prof);
        r.diagnostics.push("p = ∞ evaluated as BMO".into());
        return Ok(r);
    }
    if p < 1.0 {
        return Err(Error::Config(format!("Hardy norm needs p ≥ 1, got {p}")));
    }
    let (m, (lo, hi)) = hardy_maximal(f, prof);
    let mut r = NormReport::new(NormKind::Hp, p, lp_norm(&m, p));
    r.diagnostics.push(format!("k range [{lo}, {hi}]"));
    if p == 1.0 {
        let mean = f.quadrature(|_| 1.0).norm();
        let l1 = lp_norm(f, 1.0);
        if mean > 1e-8 * l1 {
            r.diagnostics.push(format!(
                "warning: |∫f| = {mean:e} is not small against ‖f‖₁ = {l1:e}; f is not an H¹ function on the line"
            ));
        }
    }
    Ok(r)
}

/// The maximizing dyadic interval of [`bmo_norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicInterval {
    pub start: f64,
    pub length: f64,
}

/// Dyadic Carleson BMO: `sup_P ((1/|P|) ∫_P Σ_{k ≥ −log₂ℓ(P)} |ψ_k ∗ f|²)^{1/2}`,
/// dyadic intervals anchored at the window start, from length `L` down to `h`.
pub fn bmo_norm(f: &SampledFunction1D, prof: &Profiles) -> NormReport {
    let (v, p) = bmo_scan(f, prof);
    let mut r = NormReport::new(NormKind::Bmo, f64::INFINITY, v);
    if let Some(p) = p {
        r.diagnostics.push(format!("sup at P = [{}, {}), length {}", p.start, p.start + p.length, p.length));
    }
    r
}

/// Value and maximizing interval.
pub fn bmo_scan(f: &SampledFunction1D, prof: &Profiles) -> (f64, Option<DyadicInterval>) {
    let g = *f.grid();
    let m = g.samples();
    let s = f.forward_transform();
    let ks = nonzero_scales(&s, &prof.psi);
    if ks.is_empty() {
        return (0.0, None);
    }
    let sq: Vec<Vec<f64>> = ks
        .par_iter()
        .map(|&k| {
            let sc = 2f64.powi(-k);
            s.multiply(|xi| num_complex::Complex64::new(prof.psi.eval(xi * sc), 0.0))
                .inverse_transform()
                .values()
                .iter()
                .map(|v| v.norm_sqr())
                .collect()
        })
        .collect();
    // suffix[i] = Σ_{k ≥ ks[i]} |ψ_k ∗ f|²
    let mut suffix = vec![vec![0.0; m]; ks.len() + 1];
    for i in (0..ks.len()).rev() {
        let (head, tail) = suffix.split_at_mut(i + 1);
        for ((a, b), c) in head[i].iter_mut().zip(&tail[0]).zip(&sq[i]) {
            *a = b + c;
        }
    }
    let levels = m.trailing_zeros() as usize;
    let h = g.spacing();
    let best = (0..=levels)
        .into_par_iter()
        .map(|lev| {
            let n = m >> lev;
            let len = n as f64 * h;
            let kmin = (-len.log2()).ceil() as i32;
            let idx = ks.partition_point(|&k| k < kmin);
            let field = &suffix[idx];
            let mut best = (0.0f64, 0usize);
            for b in 0..(m / n) {
                let avg = field[b * n..(b + 1) * n].iter().sum::<f64>() / n as f64;
                if avg > best.0 {
                    best = (avg, b);
                }
            }
            (best.0, lev, best.1)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0f64, 0usize, 0usize), |a, b| if b.0 > a.0 { b } else { a });
    let n = m >> best.1;
    let p = DyadicInterval { start: g.start() + (best.2 * n) as f64 * h, length: n as f64 * h };
    (best.0.sqrt(), Some(p))
}

/// `ν`-average of `(|Ω|/λ)·log(e + |Ω|/λ)^α`.
pub fn luxemburg_functional(values: &[f64], alpha: f64, lambda: f64) -> f64 {
    values
        .iter()
        .map(|v| {
            let t = v.abs() / lambda;
            if t == 0.0 {
                0.0
            } else {
                t * (E + t).ln().powf(alpha)
            }
        })
        .sum::<f64>()
        / values.len() as f64
}

const LUX_MAX_ITER: usize = 400;

/// Luxemburg norm of equally weighted samples (normalized measure), by bisection.
pub fn luxemburg_norm(values: &[f64], alpha: f64) -> Result<NormReport> {
    if alpha < 0.0 {
        return Err(Error::Config(format!("Orlicz exponent α = {alpha} is negative")));
    }
    let l1 = values.iter().map(|v| v.abs()).sum::<f64>() / values.len().max(1) as f64;
    let linf = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if l1 == 0.0 {
        return Ok(NormReport::new(NormKind::Orlicz, alpha, 0.0));
    }
    let phi = |lam: f64| luxemburg_functional(values, alpha, lam);
    let mut lo = l1 / (1.0 + (E + linf / l1).ln()).powf(alpha) * 0.1;
    let mut hi = linf * (1.0 + alpha) * 10.0;
    let mut it = 0;
    while phi(lo) < 1.0 {
        lo *= 0.5;
        it += 1;
        if it > LUX_MAX_ITER {
            return Err(Error::NoConvergence(it));
        }
    }
    while phi(hi) > 1.0 {
        hi *= 2.0;
        it += 1;
        if it > LUX_MAX_ITER {
            return Err(Error::NoConvergence(it));
        }
    }
    let mut iters = 0;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
        if iters > LUX_MAX_ITER {
            return Err(Error::NoConvergence(iters));
        }
    }
    let lam = 0.5 * (lo + hi);
    let mut r = NormReport::new(NormKind::Orlicz, alpha, lam);
    r.iterations = Some(iters);
    r.diagnostics.push(format!("defining-equation residual {:e}", (phi(lam) - 1.0).abs()));
    Ok(r)
}

/// `∫ |K(y)| log(e + |y|)^λ dy` in window coordinates.
pub fn d_lambda(k: &SampledFunction1D, lambda: f64) -> NormReport {
    let g = *k.grid();
    let v: f64 = (0..g.samples())
        .map(|i| k.values()[i].norm() * (E + g.x(i).abs()).ln().powf(lambda))
        .sum::<f64>()
        * g.spacing();
    NormReport::new(NormKind::Dlambda, lambda, v)
}

/// `∫_{ℝ²} |K(y)| log(e + |y|)^λ dy`.
pub fn d_lambda_2d(k: &SampledFunction2D, lambda: f64) -> NormReport {
    let v = k.quadrature_abs(|y1, y2| (E + y1.hypot(y2)).ln().powf(lambda));
    NormReport::new(NormKind::Dlambda, lambda, v)
}
