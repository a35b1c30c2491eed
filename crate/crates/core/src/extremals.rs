//! The sharpness families: modulated translates of η against a kernel β
//! translated to `2^{ζ_N}`, with `ζ_k = c·k`.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::bumps::Profiles;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SampledFunction1D, Spectrum1D};
use crate::operators::{
    assemble_symbol, assemble_symbol_2d, DyadicSymbol1D, DyadicSymbol2D, ProfileSymbol, Symbol1D,
    TensorSymbol,
};
use crate::packet::{
    apply_bilinear_packets, apply_linear_packets, exact_bits, packet_product, Packet, PacketFunction,
    EXACT_BITS_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Linear,
    Bilinear,
}

/// Static sizing of one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Feasibility {
    pub n: u32,
    pub c: u32,
    /// Dense grid that would hold the instance: `Nyquist ≥ 1.2·2^{cN}`, `L ≥ 4·2^{c(N-1)}`.
    pub dense_period: f64,
    pub dense_samples_log2: f64,
    /// Mantissa bits the packet route needs; must stay within [`EXACT_BITS_LIMIT`].
    pub packet_bits: f64,
    pub feasible: bool,
}

pub fn feasibility(n: u32, c: u32, layout: &Grid1D) -> Feasibility {
    let zn = (c * n) as f64;
    let dense_period = 4.0 * 2f64.powf((c * n.saturating_sub(1)) as f64);
    let nyq = 1.2 * 2f64.powf(zn);
    let dense_samples_log2 = (2.0 * nyq * dense_period).log2().ceil();
    let packet_bits = exact_bits(2f64.powf(zn), layout);
    Feasibility { n, c, dense_period, dense_samples_log2, packet_bits, feasible: n >= 1 && packet_bits <= EXACT_BITS_LIMIT }
}

#[derive(Clone, Debug)]
pub struct ExtremalInstance {
    pub family: Family,
    pub n: u32,
    pub c: u32,
    /// `Σ_k η(x + 2^{ζ_N−ζ_k}) e^{2πi x 2^{ζ_k}}`.
    pub f: PacketFunction,
    /// Same translates with conjugate carriers (bilinear family only).
    pub g: Option<PacketFunction>,
    /// Symbol of `K = β(· − 2^{ζ_N})` (or its tensor square).
    pub linear: Option<DyadicSymbol1D>,
    pub bilinear: Option<DyadicSymbol2D>,
    /// η as a single packet at the origin.
    pub eta: Packet,
    pub kernel_center: f64,
    pub profiles: Profiles,
}

fn zeta(c: u32, k: u32) -> f64 {
    2f64.powi((c * k) as i32)
}

fn check(n: u32, c: u32, prof: &Profiles, layout: &Grid1D) -> Result<()> {
    if n == 0 || c == 0 {
        return Err(Error::Config("N and c must be positive".into()));
    }
    let fz = feasibility(n, c, layout);
    if !fz.feasible {
        return Err(Error::Infeasible(format!(
            "c = {c}, N = {n}: packets need {:.1} mantissa bits (limit {EXACT_BITS_LIMIT}); \
             a dense grid would need M = 2^{} samples over L = {}",
            fz.packet_bits, fz.dense_samples_log2, fz.dense_period
        )));
    }
    if layout.period() * prof.params.eta_radius <= 1.0 {
        return Err(Error::InvalidGrid("envelope window too short to resolve η̂".into()));
    }
    if 4.0 * prof.params.eta_radius >= layout.nyquist() {
        return Err(Error::Nyquist("envelope layout cannot hold η̂ products".into()));
    }
    Ok(())
}

fn translates(n: u32, c: u32, prof: &Profiles, layout: Grid1D, sign: f64) -> PacketFunction {
    let mut f = PacketFunction::new(layout);
    let eta = prof.eta.clone();
    for k in 1..=n {
        let t = 2f64.powi((c * (n - k)) as i32);
        f.push(Packet::from_spectrum(layout, sign * zeta(c, k), -t, |xi| C64::new(eta.eval(xi), 0.0)));
    }
    f
}

fn eta_packet(prof: &Profiles, layout: Grid1D) -> Packet {
    let eta = prof.eta.clone();
    Packet::from_spectrum(layout, 0.0, 0.0, move |xi| C64::new(eta.eval(xi), 0.0))
}

fn beta_symbol(prof: &Profiles, center: f64) -> Arc<dyn Symbol1D> {
    Arc::new(ProfileSymbol::translated(prof.beta.clone(), center))
}

pub fn make_linear_extremal(n: u32, c: u32, prof: &Profiles, layout: Grid1D) -> Result<ExtremalInstance> {
    check(n, c, prof, &layout)?;
    let center = zeta(c, n);
    let sym = assemble_symbol(beta_symbol(prof, center), None)?;
    Ok(ExtremalInstance {
        family: Family::Linear,
        n,
        c,
        f: translates(n, c, prof, layout, 1.0),
        g: None,
        linear: Some(sym),
        bilinear: None,
        eta: eta_packet(prof, layout),
        kernel_center: center,
        profiles: prof.clone(),
    })
}

pub fn make_bilinear_extremal(n: u32, c: u32, prof: &Profiles, layout: Grid1D) -> Result<ExtremalInstance> {
    check(n, c, prof, &layout)?;
    let center = zeta(c, n);
    let m0 = TensorSymbol { a: beta_symbol(prof, center), b: beta_symbol(prof, center) };
    let sym = assemble_symbol_2d(Arc::new(m0), None)?;
    Ok(ExtremalInstance {
        family: Family::Bilinear,
        n,
        c,
        f: translates(n, c, prof, layout, 1.0),
        g: Some(translates(n, c, prof, layout, -1.0)),
        linear: None,
        bilinear: Some(sym),
        eta: eta_packet(prof, layout),
        kernel_center: center,
        profiles: prof.clone(),
    })
}

impl ExtremalInstance {
    pub fn layout(&self) -> Grid1D {
        self.f.layout()
    }
    /// `Tf` through the packet route.
    pub fn tf(&self) -> Result<PacketFunction> {
        let sym = self.linear.as_ref().ok_or_else(|| Error::Config("not a linear instance".into()))?;
        Ok(apply_linear_packets(sym, &self.f))
    }
    /// `𝓑(f, g)`.
    pub fn bfg(&self) -> Result<PacketFunction> {
        let sym = self.bilinear.as_ref().ok_or_else(|| Error::Config("not a bilinear instance".into()))?;
        let g = self.g.as_ref().expect("bilinear instance carries g");
        apply_bilinear_packets(sym, &self.f, g)
    }
    /// `Σ_k η e^{2πi x 2^{ζ_k}}`.
    pub fn expected_tf(&self) -> PacketFunction {
        let mut out = PacketFunction::new(self.layout());
        for k in 1..=self.n {
            let mut p = self.eta.clone();
            p.carrier = zeta(self.c, k);
            out.push(p);
        }
        out
    }
    /// `N·η²`.
    pub fn expected_bfg(&self) -> Result<PacketFunction> {
        let sq = packet_product(&self.eta, &self.eta)?.expect("same window");
        let mut out = PacketFunction::new(self.layout());
        out.push(sq.scale(C64::new(self.n as f64, 0.0)));
        Ok(out)
    }
    /// `‖η‖_∞`, from the envelope samples.
    pub fn eta_sup(&self) -> f64 {
        self.eta.envelope_samples().max_abs()
    }
    /// `‖η²‖_∞`.
    pub fn eta_sq_sup(&self) -> f64 {
        self.eta_sup().powi(2)
    }
    pub fn eta_l2(&self) -> f64 {
        let mut p = PacketFunction::new(self.layout());
        p.push(self.eta.clone());
        p.l2_norm()
    }
    /// Kernel `β(· − 2^{ζ_N})` sampled on `grid` re-centered at `2^{ζ_N}`.
    pub fn kernel_1d(&self, grid: Grid1D) -> Result<SampledFunction1D> {
        kernel_1d(&self.profiles, self.kernel_center, grid)
    }
    /// Largest value of `|β̂(ξ/2^l) η̂(ξ − 2^{ζ_k}) − [l = ζ_k] η̂(ξ − 2^{ζ_k})|`
    /// over the lattice `ξ = 2^{ζ_k} + m/L` and `l ∈ [ζ_1 − 3, ζ_N + 3]`.
    pub fn support_identity_residual(&self) -> f64 {
        let g = self.layout();
        let l = g.period();
        let (beta, eta) = (&self.profiles.beta, &self.profiles.eta);
        let mut worst = 0.0f64;
        let band = (self.profiles.params.eta_radius * l).ceil() as i64 + 1;
        for k in 1..=self.n {
            let zk = self.c * k;
            let nu = zeta(self.c, k);
            for lv in (self.c as i32 - 3)..=((self.c * self.n) as i32 + 3) {
                let s = 2f64.powi(-lv);
                for m in -band..=band {
                    let xi = nu + m as f64 / l;
                    let e = eta.eval(m as f64 / l);
                    let prod = beta.eval(xi * s) * e;
                    let want = if lv == zk as i32 { e } else { 0.0 };
                    worst = worst.max((prod - want).abs());
                }
            }
        }
        worst
    }
    /// Pairwise frequency windows of the pieces of `f` are disjoint.
    pub fn pieces_disjoint(&self) -> bool {
        let w: Vec<(f64, f64)> = self.f.packets().iter().map(Packet::freq_window).collect();
        w.iter().enumerate().all(|(i, a)| w[i + 1..].iter().all(|b| a.1 < b.0 || b.1 < a.0))
    }
}

/// `β(· − center)` on `grid` moved to `center` (true coordinates).
pub fn kernel_1d(prof: &Profiles, center: f64, grid: Grid1D) -> Result<SampledFunction1D> {
    let g0 = grid.centered_at(0.0);
    if g0.nyquist() <= prof.beta.support().1 {
        return Err(Error::Nyquist("kernel grid does not resolve β̂".into()));
    }
    let beta = prof.beta.clone();
    let v = Spectrum1D::from_fn(g0, move |xi| C64::new(beta.eval(xi), 0.0)).inverse_transform();
    SampledFunction1D::new(grid.centered_at(center), v.into_values())
}

/// `∫∫ |a(y₁)| |b(y₂)| log(e + |y|)^λ dy` for a tensor-product kernel.
pub fn d_lambda_tensor(a: &SampledFunction1D, b: &SampledFunction1D, lambda: f64) -> f64 {
    use rayon::prelude::*;
    let (ga, gb) = (*a.grid(), *b.grid());
    let bb: Vec<(f64, f64)> = (0..gb.samples()).map(|j| (gb.x(j), b.values()[j].norm())).collect();
    let rows: Vec<f64> = (0..ga.samples())
        .into_par_iter()
        .map(|i| {
            let (x, va) = (ga.x(i), a.values()[i].norm());
            if va == 0.0 {
                return 0.0;
            }
            va * bb.iter().map(|&(y, vb)| vb * (std::f64::consts::E + x.hypot(y)).ln().powf(lambda)).sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() * ga.spacing() * gb.spacing()
}

/// Parameter/value series with a least-squares slope in log-log coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the fit in natural-log units.
    pub residual: f64,
}

impl GrowthFit {
    pub fn fit(params: Vec<f64>, values: Vec<f64>) -> Self {
        let (slope, intercept, residual) = loglog_fit(&params, &values);
        Self { params, values, slope, intercept, residual }
    }
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["N", "norm", "slope", "residual"])?;
        for (p, v) in self.params.iter().zip(&self.values) {
            w.write_record([
                crate::grid::fmt(*p),
                crate::grid::fmt(*v),
                crate::grid::fmt(self.slope),
                crate::grid::fmt(self.residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least squares `ln v = s ln p + b`: `(s, b, rms residual)`.
pub fn loglog_fit(params: &[f64], values: &[f64]) -> (f64, f64, f64) {
    let xs: Vec<f64> = params.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let s = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - s * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - s * x - b).powi(2)).sum();
    (s, b, (rss / n).sqrt())
}

/// Evaluates `norm(N)` for each `N` and fits the growth exponent.
pub fn measure_growth(ns: &[u32], norm: impl Fn(u32) -> Result<f64> + Sync) -> Result<GrowthFit> {
    use rayon::prelude::*;
    let values: Vec<f64> = ns.par_iter().map(|&n| norm(n)).collect::<Result<_>>()?;
    Ok(GrowthFit::fit(ns.iter().map(|&n| n as f64).collect(), values))
}

/// Largest prefix of `ns` that the packet route can hold at spacing `c`.
pub fn feasible_ns(ns: &[u32], c: u32, layout: &Grid1D) -> Vec<u32> {
    ns.iter().copied().filter(|&n| feasibility(n, c, layout).feasible).collect()
}

/// `sup_bound(a − b)`: a rigorous upper bound on `max_x |a(x) − b(x)|`.
pub fn deviation_bound(a: &PacketFunction, b: &PacketFunction) -> f64 {
    a.add(&b.scale(C64::new(-1.0, 0.0))).compact().sup_bound()
}
