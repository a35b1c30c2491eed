//! Sums of modulated envelopes `f(x) = Σ_p e^{2πiν_p x} a_p(x)`.
//!
//! The extremal families put carriers at `2^{cN}` and translates at
//! `2^{c(N-1)}`; a dense grid holding both is far beyond memory. Each envelope
//! lives instead on its own window of the shared layout (period `L`, `M`
//! samples), centered at `c_p`, stored as center-relative coefficients
//! `B[m]` with `a_p(x) = (1/L) Σ B[m] e^{2πi m (x - c_p)/L}` inside the window
//! and 0 outside. Carriers stay symbolic, so multipliers, translations and
//! products act exactly on the slowly varying parts.
//!
//! Exactness needs every lattice frequency `ν + m/L` representable in f64;
//! see [`exact_bits`].

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::bumps::Profile;
use crate::grid::{cis_cycles, Grid1D, SampledFunction1D, Spectrum1D};
use crate::operators::{dilates_meeting, DyadicSymbol1D, DyadicSymbol2D};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Default envelope window: `M = 2^14`, spacing 1.
pub fn default_layout() -> Grid1D {
    Grid1D::new(16384.0, 16384).expect("valid")
}

/// Mantissa bits needed to hold every lattice frequency `ν + m/L` exactly:
/// `log₂(|ν| + Nyquist) + log₂ L` (the layout period is a power of two).
pub fn exact_bits(max_carrier: f64, layout: &Grid1D) -> f64 {
    (max_carrier.abs() + layout.nyquist()).log2() + layout.period().log2()
}

/// Budget for [`exact_bits`], one short of the f64 mantissa.
pub const EXACT_BITS_LIMIT: f64 = 52.0;

#[derive(Clone, Debug)]
pub struct Packet {
    pub carrier: f64,
    pub center: f64,
    /// Envelope shifted to the origin; its grid is the layout centered at 0.
    pub shape: Spectrum1D,
    /// Largest `|m|` with a nonzero coefficient.
    pub band: i64,
}

fn band_of(s: &Spectrum1D) -> i64 {
    let g = s.grid();
    s.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != ZERO)
        .map(|(slot, _)| g.freq_index(slot).abs())
        .max()
        .unwrap_or(0)
}

impl Packet {
    /// Envelope given by its Fourier transform `â` about `center`:
    /// `a(x) = ∫ â(ξ) e^{2πi(x-center)ξ} dξ`.
    pub fn from_spectrum(layout: Grid1D, carrier: f64, center: f64, hat: impl Fn(f64) -> C64) -> Self {
        let shape = Spectrum1D::from_fn(layout.centered_at(0.0), hat);
        let band = band_of(&shape);
        Self { carrier, center, shape, band }
    }
    pub fn layout(&self) -> Grid1D {
        *self.shape.grid()
    }
    pub fn is_zero(&self) -> bool {
        self.shape.coeffs().iter().all(|c| *c == ZERO)
    }
    /// Lowest and highest frequency carried.
    pub fn freq_window(&self) -> (f64, f64) {
        let w = self.band as f64 / self.layout().period();
        (self.carrier - w, self.carrier + w)
    }
    /// Radial interval `[min|ξ|, max|ξ|]` over the frequency window.
    pub fn radial_window(&self) -> (f64, f64) {
        let (a, b) = self.freq_window();
        if a <= 0.0 && b >= 0.0 {
            (0.0, a.abs().max(b.abs()))
        } else {
            (a.abs().min(b.abs()), a.abs().max(b.abs()))
        }
    }
    /// `x ↦ p(x - t)`.
    pub fn translate(&self, t: f64) -> Self {
        let ph = cis_cycles(-self.carrier * t);
        let mut out = self.clone();
        out.center += t;
        for c in out.shape.coeffs_mut() {
            *c *= ph;
        }
        out
    }
    /// Same function, window moved to `center`. Exact up to envelope tails
    /// crossing the window edge.
    pub fn recentered(&self, center: f64) -> Self {
        let d = center - self.center;
        if d == 0.0 {
            return self.clone();
        }
        let l = self.layout().period();
        let g = self.layout();
        let mut out = self.clone();
        out.center = center;
        for (slot, c) in out.shape.coeffs_mut().iter_mut().enumerate() {
            *c *= cis_cycles(g.freq_index(slot) as f64 * d / l);
        }
        out
    }
    pub fn conj(&self) -> Self {
        let g = self.layout();
        let coeffs = (0..g.samples()).map(|slot| self.shape.coeff(-g.freq_index(slot)).conj()).collect();
        let shape = Spectrum1D::new(g, coeffs).expect("same length");
        Self { carrier: -self.carrier, center: self.center, shape, band: self.band }
    }
    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for c in out.shape.coeffs_mut() {
            *c *= s;
        }
        out
    }
    /// Envelope samples at `center - L/2 + i h`.
    pub fn envelope_samples(&self) -> SampledFunction1D {
        let f = self.shape.inverse_transform();
        let g = self.layout().centered_at(self.center);
        SampledFunction1D::new(g, f.into_values()).expect("same length")
    }
    /// Envelope value at `x` by direct summation (0 outside the window).
    pub fn envelope_at(&self, x: f64) -> C64 {
        let g = self.layout();
        let l = g.period();
        let u = x - self.center;
        if u < -l / 2.0 || u >= l / 2.0 {
            return ZERO;
        }
        let mut s = ZERO;
        for m in -self.band..=self.band {
            let c = self.shape.coeff(m);
            if c != ZERO {
                s += c * cis_cycles(m as f64 * u / l);
            }
        }
        s / l
    }
    pub fn eval(&self, x: f64) -> C64 {
        cis_cycles(self.carrier * x) * self.envelope_at(x)
    }
    /// Multiplier `σ(ν + m/L)` on the coefficients; `None` if it kills everything.
    pub fn multiplied(&self, sigma: impl Fn(f64) -> C64) -> Option<Self> {
        let g = self.layout();
        let l = g.period();
        let mut out = self.clone();
        let mut any = false;
        for m in -self.band..=self.band {
            let slot = g.slot(m).expect("band below Nyquist");
            let c = out.shape.coeffs()[slot];
            if c == ZERO {
                continue;
            }
            let v = c * sigma(self.carrier + m as f64 / l);
            any |= v != ZERO;
            out.shape.coeffs_mut()[slot] = v;
        }
        if !any {
            return None;
        }
        out.band = band_of(&out.shape);
        Some(out)
    }
}

fn disjoint_windows(a: &Packet, b: &Packet) -> bool {
    (a.center - b.center).abs() >= a.layout().period()
}

fn midpoint(a: &Packet, b: &Packet) -> f64 {
    0.5 * (a.center + b.center)
}

/// Pointwise product of two packets (carriers add). `None` when the windows
/// are disjoint.
pub fn packet_product(a: &Packet, b: &Packet) -> Result<Option<Packet>> {
    if disjoint_windows(a, b) || a.is_zero() || b.is_zero() {
        return Ok(None);
    }
    let g = a.layout();
    let band = a.band + b.band;
    if band >= g.samples() as i64 / 2 {
        return Err(Error::Nyquist(format!(
            "product band {band} reaches half the envelope samples {}",
            g.samples()
        )));
    }
    let c = midpoint(a, b);
    let sa = a.recentered(c).shape.inverse_transform();
    let sb = b.recentered(c).shape.inverse_transform();
    let mut shape = sa.mul(&sb)?.forward_transform();
    for (slot, v) in shape.coeffs_mut().iter_mut().enumerate() {
        if g.freq_index(slot).abs() > band {
            *v = ZERO;
        }
    }
    let band = band_of(&shape);
    Ok(Some(Packet { carrier: a.carrier + b.carrier, center: c, shape, band }))
}

/// `∫ a(x) conj(b(x)) dx`.
pub fn packet_inner(a: &Packet, b: &Packet) -> C64 {
    if disjoint_windows(a, b) {
        return ZERO;
    }
    let g = a.layout();
    let l = g.period();
    let dnu = a.carrier - b.carrier;
    if dnu.abs() * l > (a.band + b.band) as f64 {
        return ZERO;
    }
    let c = midpoint(a, b);
    let ra = a.recentered(c);
    let rb = b.recentered(c);
    if dnu == 0.0 {
        let s: C64 = ra.shape.coeffs().iter().zip(rb.shape.coeffs()).map(|(x, y)| x * y.conj()).sum();
        return s / l;
    }
    let sa = ra.envelope_samples();
    let sb = rb.envelope_samples();
    let sg = *sa.grid();
    let mut s = ZERO;
    for i in 0..sg.samples() {
        s += cis_cycles(dnu * sg.x(i)) * sa.values()[i] * sb.values()[i].conj();
    }
    s * sg.spacing()
}

#[derive(Clone, Debug)]
pub struct PacketFunction {
    layout: Grid1D,
    packets: Vec<Packet>,
}

impl PacketFunction {
    pub fn new(layout: Grid1D) -> Self {
        Self { layout: layout.centered_at(0.0), packets: Vec::new() }
    }
    pub fn layout(&self) -> Grid1D {
        self.layout
    }
    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }
    pub fn len(&self) -> usize {
        self.packets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }
    pub fn push(&mut self, p: Packet) {
        assert_eq!(p.layout(), self.layout, "packet on a different layout");
        if !p.is_zero() {
            self.packets.push(p);
        }
    }
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for p in &other.packets {
            out.push(p.clone());
        }
        out
    }
    pub fn scale(&self, s: C64) -> Self {
        Self { layout: self.layout, packets: self.packets.iter().map(|p| p.scale(s)).collect() }
    }
    pub fn translate(&self, t: f64) -> Self {
        Self { layout: self.layout, packets: self.packets.iter().map(|p| p.translate(t)).collect() }
    }
    pub fn conj(&self) -> Self {
        Self { layout: self.layout, packets: self.packets.iter().map(Packet::conj).collect() }
    }
    /// Merges packets sharing carrier and center; drops zeros. Order is by
    /// first appearance, so the result is deterministic.
    pub fn compact(&self) -> Self {
        let mut index: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        let mut out: Vec<Packet> = Vec::new();
        for p in &self.packets {
            let key = (p.carrier.to_bits(), p.center.to_bits());
            match index.get(&key) {
                Some(&i) => {
                    let q = &mut out[i];
                    for (a, b) in q.shape.coeffs_mut().iter_mut().zip(p.shape.coeffs()) {
                        *a += b;
                    }
                }
                None => {
                    index.insert(key, out.len());
                    out.push(p.clone());
                }
            }
        }
        for p in &mut out {
            p.band = band_of(&p.shape);
        }
        out.retain(|p| !p.is_zero());
        Self { layout: self.layout, packets: out }
    }
    pub fn eval(&self, x: f64) -> C64 {
        self.packets.iter().map(|p| p.eval(x)).sum()
    }
    /// Direct evaluation on the points of a dense grid.
    pub fn rasterize(&self, grid: Grid1D) -> SampledFunction1D {
        let values = (0..grid.samples()).into_par_iter().map(|i| self.eval(grid.x(i))).collect();
        SampledFunction1D::new(grid, values).expect("length")
    }
    /// Pointwise product, all pairs.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::new(self.layout);
        for a in &self.packets {
            for b in &other.packets {
                if let Some(p) = packet_product(a, b)? {
                    out.push(p);
                }
            }
        }
        Ok(out.compact())
    }
    /// `|f|²` as a packet sum.
    pub fn abs_sq(&self) -> Result<Self> {
        self.mul(&self.conj())
    }
    /// `∫ f conj(g)`.
    pub fn inner(&self, other: &Self) -> C64 {
        let rows: Vec<C64> = self
            .packets
            .par_iter()
            .map(|a| other.packets.iter().map(|b| packet_inner(a, b)).sum())
            .collect();
        rows.into_iter().sum()
    }
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
    /// `‖f‖_p` for even `p`, through `‖f‖_{2q} = ‖f^q‖₂^{1/q}`.
    pub fn lp_norm_even(&self, p: u32) -> Result<f64> {
        if p == 0 || p % 2 != 0 {
            return Err(Error::Config(format!("packet L^p needs an even p, got {p}")));
        }
        let q = p / 2;
        let mut pow = self.clone();
        for _ in 1..q {
            pow = pow.mul(self)?;
        }
        Ok(pow.l2_norm().powf(1.0 / q as f64))
    }
    /// `Σ_p sup|a_p|` bound, `Σ_p (1/L) Σ_m |B_p[m]|`.
    pub fn sup_bound(&self) -> f64 {
        let l = self.layout.period();
        // + 0.0: an empty f64 sum is −0
        self.packets.iter().map(|p| p.shape.coeffs().iter().map(|c| c.norm()).sum::<f64>() / l).sum::<f64>() + 0.0
    }
    /// `max_x Σ_p |a_p(x)|` over the union of the window lattices.
    /// Centers must sit on the lattice.
    pub fn envelope_sup(&self) -> Result<f64> {
        let h = self.layout.spacing();
        let mut acc: BTreeMap<i64, f64> = BTreeMap::new();
        for p in &self.packets {
            let q = p.center / h;
            if (q - q.round()).abs() > 1e-9 {
                return Err(Error::GridMismatch("packet center off the envelope lattice".into()));
            }
            let s = p.envelope_samples();
            let o = q.round() as i64 - self.layout.samples() as i64 / 2;
            for (i, v) in s.values().iter().enumerate() {
                *acc.entry(o + i as i64).or_insert(0.0) += v.norm();
            }
        }
        Ok(acc.values().fold(0.0, |m, &v| m.max(v)))
    }
    /// Largest carrier magnitude and largest center magnitude.
    pub fn extent(&self) -> (f64, f64) {
        self.packets
            .iter()
            .fold((0.0f64, 0.0f64), |(a, b), p| (a.max(p.carrier.abs()), b.max(p.center.abs())))
    }
}

/// `T f` for a packet sum: each packet meets finitely many dilates `j`, each
/// acting as the local filter `m₀(2^{-j}·)` followed by translation by `2^{-j}x₀`.
pub fn apply_linear_packets(sym: &DyadicSymbol1D, f: &PacketFunction) -> PacketFunction {
    let mut out = PacketFunction::new(f.layout());
    for p in f.packets() {
        let (r0, r1) = p.radial_window();
        for j in dilates_meeting(sym.m0.support(), r0, r1, sym.j_range) {
            let s = 2f64.powi(-j);
            if let Some(q) = p.multiplied(|xi| sym.m0.eval_local(xi * s)) {
                out.push(q.translate(sym.m0.offset() * s));
            }
        }
    }
    out.compact()
}

/// Multiplier `σ` followed by translation by `t`, for a single filter.
pub fn filter_packets(f: &PacketFunction, sigma: impl Fn(f64) -> C64, t: f64) -> PacketFunction {
    let mut out = PacketFunction::new(f.layout());
    for p in f.packets() {
        if let Some(q) = p.multiplied(&sigma) {
            out.push(q.translate(t));
        }
    }
    out.compact()
}

/// Scales `k` for which `ψ(2^{-k}·)` meets some packet of `f`.
pub fn packet_scales(f: &PacketFunction, psi: &Profile) -> Vec<i32> {
    let mut ks = BTreeSet::new();
    for p in f.packets() {
        let (r0, r1) = p.radial_window();
        ks.extend(dilates_meeting(psi.support(), r0, r1, None));
    }
    ks.into_iter().collect()
}

/// The pieces `(ψ_k)^y ∗ f`, by scale.
pub fn shifted_pieces_packets(f: &PacketFunction, psi: &Profile, y: f64) -> Vec<(i32, PacketFunction)> {
    packet_scales(f, psi)
        .into_par_iter()
        .map(|k| {
            let s = 2f64.powi(-k);
            (k, filter_packets(f, |xi| C64::new(psi.eval(xi.abs() * s), 0.0), s * y))
        })
        .collect()
}

/// `(S^y f)² = Σ_k |(ψ_k)^y ∗ f|²` as a packet sum.
pub fn square_sum_packets(f: &PacketFunction, psi: &Profile, y: f64) -> Result<PacketFunction> {
    let parts: Vec<Result<PacketFunction>> =
        shifted_pieces_packets(f, psi, y).par_iter().map(|(_, p)| p.abs_sq()).collect();
    let mut out = PacketFunction::new(f.layout());
    for part in parts {
        out = out.add(&part?);
    }
    Ok(out.compact())
}

/// `‖S^y f‖_p` for `p = 2` or `p` a multiple of 4.
pub fn shifted_square_norm_packets(f: &PacketFunction, psi: &Profile, y: f64, p: u32) -> Result<f64> {
    match p {
        2 => Ok(shifted_pieces_packets(f, psi, y).iter().map(|(_, q)| q.l2_norm().powi(2)).sum::<f64>().sqrt()),
        p if p % 4 == 0 => Ok(square_sum_packets(f, psi, y)?.lp_norm_even(p / 2)?.sqrt()),
        _ => Err(Error::Config(format!("packet square-function norm needs p = 2 or 4 | p, got {p}"))),
    }
}

/// `𝓑(f, g)` for packet sums. For each pair and each dilate `l` meeting the
/// pair's frequency box, the local symbol is applied on the product lattice and
/// anti-diagonals summed; both inputs are translated by `2^{-l}x₀` first.
pub fn apply_bilinear_packets(sym: &DyadicSymbol2D, f: &PacketFunction, g: &PacketFunction) -> Result<PacketFunction> {
    let layout = f.layout();
    if g.layout() != layout {
        return Err(Error::GridMismatch("packet sums on different layouts".into()));
    }
    let pairs: Vec<(&Packet, &Packet)> =
        f.packets().iter().flat_map(|p| g.packets().iter().map(move |q| (p, q))).collect();
    let parts: Vec<Result<Vec<Packet>>> =
        pairs.par_iter().map(|(p, q)| bilinear_pair(sym, p, q)).collect();
    let mut out = PacketFunction::new(layout);
    for part in parts {
        for p in part? {
            out.push(p);
        }
    }
    Ok(out.compact())
}

fn box_radii(p: &Packet, q: &Packet) -> (f64, f64) {
    let (a0, a1) = p.radial_window();
    let (b0, b1) = q.radial_window();
    (a0.hypot(b0), a1.hypot(b1))
}

fn bilinear_pair(sym: &DyadicSymbol2D, p: &Packet, q: &Packet) -> Result<Vec<Packet>> {
    let g = p.layout();
    let l = g.period();
    let (r0, r1) = box_radii(p, q);
    let band = p.band + q.band;
    let mut out = Vec::new();
    for j in dilates_meeting(sym.m0.support(), r0, r1, sym.j_range) {
        let s = 2f64.powi(-j);
        let (o1, o2) = sym.m0.offset();
        let pt = p.translate(o1 * s);
        let qt = q.translate(o2 * s);
        if disjoint_windows(&pt, &qt) {
            continue;
        }
        if band >= g.samples() as i64 / 2 {
            return Err(Error::Nyquist(format!("bilinear output band {band} too wide for the layout")));
        }
        let c = midpoint(&pt, &qt);
        let (pr, qr) = (pt.recentered(c), qt.recentered(c));
        let mut acc = vec![ZERO; (2 * band + 1) as usize];
        let mut any = false;
        for m1 in -p.band..=p.band {
            let u = pr.shape.coeff(m1);
            if u == ZERO {
                continue;
            }
            let xi1 = (p.carrier + m1 as f64 / l) * s;
            for m2 in -q.band..=q.band {
                let v = qr.shape.coeff(m2);
                if v == ZERO {
                    continue;
                }
                let w = sym.m0.eval_local(xi1, (q.carrier + m2 as f64 / l) * s);
                if w != ZERO {
                    any = true;
                    acc[(m1 + m2 + band) as usize] += w * u * v;
                }
            }
        }
        if !any {
            continue;
        }
        let mut shape = Spectrum1D::new(g, vec![ZERO; g.samples()])?;
        for (k, v) in acc.into_iter().enumerate() {
            let n = k as i64 - band;
            let slot = g.slot(n).expect("inside band");
            shape.coeffs_mut()[slot] = v / l;
        }
        let b = band_of(&shape);
        out.push(Packet { carrier: p.carrier + q.carrier, center: c, shape, band: b });
    }
    Ok(out)
}
