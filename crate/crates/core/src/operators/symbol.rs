//! Annulus-supported symbols `m₀` and their dyadic sums `m = Σ_j m₀(2^{-j}·)`.
//!
//! A symbol is split as `m₀(ξ) = e^{-2πi⟨x₀,ξ⟩}·local(ξ)`: `x₀` is the spatial
//! center of the kernel `K = m₀^∨`. Keeping the phase apart lets packet code
//! translate envelopes exactly instead of multiplying by a fast oscillation.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::bumps::Profile;
use crate::error::{Error, Result};
use crate::grid::{cis_cycles, Grid1D, SampledFunction1D, SampledFunction2D, Spectrum1D};

pub trait Symbol1D: Send + Sync + fmt::Debug {
    /// Symbol with the translation phase removed.
    fn eval_local(&self, xi: f64) -> C64;
    /// Spatial center of the kernel.
    fn offset(&self) -> f64 {
        0.0
    }
    /// Closed interval of `|ξ|` outside which `eval_local` vanishes.
    fn support(&self) -> (f64, f64);
    fn eval(&self, xi: f64) -> C64 {
        cis_cycles(-self.offset() * xi) * self.eval_local(xi)
    }
}

pub trait Symbol2D: Send + Sync + fmt::Debug {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64;
    fn offset(&self) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Closed interval of `|(ξ₁,ξ₂)|` outside which `eval_local` vanishes.
    fn support(&self) -> (f64, f64);
    fn eval(&self, xi1: f64, xi2: f64) -> C64 {
        let (a, b) = self.offset();
        cis_cycles(-(a * xi1 + b * xi2)) * self.eval_local(xi1, xi2)
    }
}

/// Even radial profile, optionally translated to `offset`.
#[derive(Clone, Debug)]
pub struct ProfileSymbol {
    pub profile: Profile,
    pub offset: f64,
}

impl ProfileSymbol {
    pub fn new(profile: Profile) -> Self {
        Self { profile, offset: 0.0 }
    }
    pub fn translated(profile: Profile, offset: f64) -> Self {
        Self { profile, offset }
    }
}

impl Symbol1D for ProfileSymbol {
    fn eval_local(&self, xi: f64) -> C64 {
        C64::new(self.profile.eval(xi), 0.0)
    }
    fn offset(&self) -> f64 {
        self.offset
    }
    fn support(&self) -> (f64, f64) {
        self.profile.support()
    }
}

/// Radial profile on ℝ².
#[derive(Clone, Debug)]
pub struct RadialSymbol {
    pub profile: Profile,
    pub offset: (f64, f64),
}

impl Symbol2D for RadialSymbol {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        C64::new(self.profile.eval(xi1.hypot(xi2)), 0.0)
    }
    fn offset(&self) -> (f64, f64) {
        self.offset
    }
    fn support(&self) -> (f64, f64) {
        self.profile.support()
    }
}

/// `a(ξ₁)·b(ξ₂)`: the symbol of `K(y₁,y₂) = k_a(y₁) k_b(y₂)`.
#[derive(Clone, Debug)]
pub struct TensorSymbol {
    pub a: Arc<dyn Symbol1D>,
    pub b: Arc<dyn Symbol1D>,
}

impl Symbol2D for TensorSymbol {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        self.a.eval_local(xi1) * self.b.eval_local(xi2)
    }
    fn offset(&self) -> (f64, f64) {
        (self.a.offset(), self.b.offset())
    }
    fn support(&self) -> (f64, f64) {
        let (a0, a1) = self.a.support();
        let (b0, b1) = self.b.support();
        (a0.hypot(b0), a1.hypot(b1))
    }
}

type Fn1 = Arc<dyn Fn(f64) -> C64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// Closure-backed symbol; the caller vouches for the declared support.
#[derive(Clone)]
pub struct FnSymbol1D {
    f: Fn1,
    support: (f64, f64),
    offset: f64,
}

impl FnSymbol1D {
    pub fn new(support: (f64, f64), f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), support, offset: 0.0 }
    }
    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }
}

impl fmt::Debug for FnSymbol1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSymbol1D({:?}, offset {})", self.support, self.offset)
    }
}

impl Symbol1D for FnSymbol1D {
    fn eval_local(&self, xi: f64) -> C64 {
        (self.f)(xi)
    }
    fn offset(&self) -> f64 {
        self.offset
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
}

#[derive(Clone)]
pub struct FnSymbol2D {
    f: Fn2,
    support: (f64, f64),
    offset: (f64, f64),
}

impl FnSymbol2D {
    pub fn new(support: (f64, f64), f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), support, offset: (0.0, 0.0) }
    }
    pub fn with_offset(mut self, offset: (f64, f64)) -> Self {
        self.offset = offset;
        self
    }
}

impl fmt::Debug for FnSymbol2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnSymbol2D({:?}, offset {:?})", self.support, self.offset)
    }
}

impl Symbol2D for FnSymbol2D {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        (self.f)(xi1, xi2)
    }
    fn offset(&self) -> (f64, f64) {
        self.offset
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// Symbol of a sampled kernel: the trapezoid Fourier sum, evaluable anywhere.
/// The window center is used as the offset.
#[derive(Clone, Debug)]
pub struct SampledSymbol1D {
    kernel: SampledFunction1D,
    support: (f64, f64),
}

impl SampledSymbol1D {
    pub fn new(kernel: SampledFunction1D, support: (f64, f64)) -> Self {
        Self { kernel, support }
    }
}

impl Symbol1D for SampledSymbol1D {
    fn eval_local(&self, xi: f64) -> C64 {
        let g = self.kernel.grid();
        let c = g.center();
        let mut s = C64::new(0.0, 0.0);
        for (i, v) in self.kernel.values().iter().enumerate() {
            s += v * cis_cycles(-(g.x(i) - c) * xi);
        }
        s * g.spacing()
    }
    fn offset(&self) -> f64 {
        self.kernel.grid().center()
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// 2D analogue of [`SampledSymbol1D`]; zero rows and samples are skipped and
/// the phase is factored per axis.
#[derive(Clone, Debug)]
pub struct SampledSymbol2D {
    /// `(y₁, [(column, value)])` per nonzero row.
    rows: Vec<(f64, Vec<(usize, C64)>)>,
    cols: Vec<f64>,
    center: (f64, f64),
    area: f64,
    support: (f64, f64),
}

impl SampledSymbol2D {
    pub fn new(kernel: &SampledFunction2D, support: (f64, f64)) -> Self {
        let g = *kernel.grid();
        let n = g.samples();
        let c = g.center();
        let cols: Vec<f64> = (0..n).map(|i2| g.point(0, i2).1 - c.1).collect();
        let mut rows = Vec::new();
        for i1 in 0..n {
            let row: Vec<(usize, C64)> =
                (0..n).map(|i2| (i2, kernel.at(i1, i2))).filter(|(_, v)| *v != C64::new(0.0, 0.0)).collect();
            if !row.is_empty() {
                rows.push((g.point(i1, 0).0 - c.0, row));
            }
        }
        Self { rows, cols, center: c, area: g.spacing() * g.spacing(), support }
    }
}

impl Symbol2D for SampledSymbol2D {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        let ph2: Vec<C64> = self.cols.iter().map(|&y2| cis_cycles(-y2 * xi2)).collect();
        let mut s = C64::new(0.0, 0.0);
        for (y1, row) in &self.rows {
            let mut r = C64::new(0.0, 0.0);
            for &(i2, v) in row {
                r += v * ph2[i2];
            }
            s += r * cis_cycles(-y1 * xi1);
        }
        s * self.area
    }
    fn offset(&self) -> (f64, f64) {
        self.center
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
}

/// Which slot a bilinear transpose moves the pairing onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

impl Slot {
    /// Integer matrix `A` with `K^{*i}(y) = K(A y)`; both satisfy `A² = I`.
    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Slot::First => [[-1, 0], [-1, 1]],
            Slot::Second => [[1, -1], [0, -1]],
        }
    }
}

fn apply(a: [[i64; 2]; 2], v: (f64, f64)) -> (f64, f64) {
    (a[0][0] as f64 * v.0 + a[0][1] as f64 * v.1, a[1][0] as f64 * v.0 + a[1][1] as f64 * v.1)
}

fn apply_t(a: [[i64; 2]; 2], v: (f64, f64)) -> (f64, f64) {
    (a[0][0] as f64 * v.0 + a[1][0] as f64 * v.1, a[0][1] as f64 * v.0 + a[1][1] as f64 * v.1)
}

/// Symbol of `K^{*i}`: `K̂(Aᵀξ)`, kernel centered at `A x₀`.
#[derive(Clone, Debug)]
pub struct TransposedSymbol {
    pub inner: Arc<dyn Symbol2D>,
    pub slot: Slot,
}

/// Operator norm of both transpose matrices (the golden ratio).
pub const TRANSPOSE_NORM: f64 = 1.618_033_988_749_895;

impl Symbol2D for TransposedSymbol {
    fn eval_local(&self, xi1: f64, xi2: f64) -> C64 {
        let (a, b) = apply_t(self.slot.matrix(), (xi1, xi2));
        self.inner.eval_local(a, b)
    }
    fn offset(&self) -> (f64, f64) {
        apply(self.slot.matrix(), self.inner.offset())
    }
    fn support(&self) -> (f64, f64) {
        let (a, b) = self.inner.support();
        (a / TRANSPOSE_NORM, b * TRANSPOSE_NORM)
    }
}

/// Inclusive range of dilation indices; `None` in a symbol means all of ℤ.
pub type JRange = Option<(i32, i32)>;

fn scales(support: (f64, f64), r: f64, range: JRange) -> std::ops::RangeInclusive<i32> {
    let (a, b) = support;
    if r == 0.0 || b <= 0.0 {
        return 1..=0;
    }
    let mut lo = (r / b).log2().floor() as i32;
    let mut hi = if a > 0.0 { (r / a).log2().ceil() as i32 } else { 1100 };
    if let Some((l, h)) = range {
        lo = lo.max(l);
        hi = hi.min(h);
    }
    lo..=hi
}

/// Indices `j` for which `m₀(2^{-j}ξ)` can be nonzero at radius `r`.
pub fn active_dilates(support: (f64, f64), r: f64, range: JRange) -> std::ops::RangeInclusive<i32> {
    scales(support, r, range)
}

/// Dilates `j` whose annulus `2^j·[a,b]` meets the radial interval `[r0, r1]`.
pub fn dilates_meeting(support: (f64, f64), r0: f64, r1: f64, range: JRange) -> Vec<i32> {
    let (a, b) = support;
    if r1 <= 0.0 || b <= 0.0 {
        return Vec::new();
    }
    let lo = if r0 > 0.0 { (r0 / b).log2().floor() as i32 } else { (r1 / b).log2().floor() as i32 - 1100 };
    let hi = if a > 0.0 { (r1 / a).log2().ceil() as i32 } else { 1100 };
    let (mut lo, mut hi) = (lo.max(-1100), hi.min(1100));
    if let Some((l, h)) = range {
        lo = lo.max(l);
        hi = hi.min(h);
    }
    (lo..=hi).filter(|&j| 2f64.powi(j) * a <= r1 && 2f64.powi(j) * b >= r0).collect()
}

#[derive(Clone, Debug)]
pub struct DyadicSymbol1D {
    pub m0: Arc<dyn Symbol1D>,
    pub j_range: JRange,
}

#[derive(Clone, Debug)]
pub struct DyadicSymbol2D {
    pub m0: Arc<dyn Symbol2D>,
    pub j_range: JRange,
}

const ANNULUS: (f64, f64) = (0.5, 2.0);

fn check_annulus(support: (f64, f64), probe: impl Fn(f64) -> f64) -> Result<()> {
    let (a, b) = support;
    if a < ANNULUS.0 * (1.0 - 1e-12) || b > ANNULUS.1 * (1.0 + 1e-12) {
        return Err(Error::Support(format!("declared support [{a}, {b}] leaves [1/2, 2]")));
    }
    for i in 0..4000 {
        let r = if i < 2000 { 0.5 * i as f64 / 2000.0 } else { 2.0 + 6.0 * (i - 2000) as f64 / 2000.0 };
        if r > 0.0 && r < 0.5 || r > 2.0 {
            let v = probe(r);
            if v != 0.0 {
                return Err(Error::Support(format!("m0 is {v:e} at |ξ| = {r}")));
            }
        }
    }
    Ok(())
}

/// Builds `m = Σ_{j∈range} m₀(2^{-j}·)` after checking `supp m₀ ⊂ {1/2 ≤ |ξ| ≤ 2}`.
pub fn assemble_symbol(m0: Arc<dyn Symbol1D>, j_range: JRange) -> Result<DyadicSymbol1D> {
    check_annulus(m0.support(), |r| m0.eval_local(r).norm().max(m0.eval_local(-r).norm()))?;
    Ok(DyadicSymbol1D { m0, j_range })
}

pub fn assemble_symbol_2d(m0: Arc<dyn Symbol2D>, j_range: JRange) -> Result<DyadicSymbol2D> {
    check_annulus(m0.support(), |r| {
        (0..16)
            .map(|q| {
                let t = std::f64::consts::PI * q as f64 / 8.0;
                m0.eval_local(r * t.cos(), r * t.sin()).norm()
            })
            .fold(0.0, f64::max)
    })?;
    Ok(DyadicSymbol2D { m0, j_range })
}

impl DyadicSymbol1D {
    /// No annulus check; used for symbols that are dyadic sums by construction
    /// but live on a wider annulus.
    pub fn new_unchecked(m0: Arc<dyn Symbol1D>, j_range: JRange) -> Self {
        Self { m0, j_range }
    }
    pub fn terms(&self, xi: f64) -> std::ops::RangeInclusive<i32> {
        scales(self.m0.support(), xi.abs(), self.j_range)
    }
    pub fn eval(&self, xi: f64) -> C64 {
        self.terms(xi).map(|j| self.m0.eval(xi * 2f64.powi(-j))).sum()
    }
    /// Number of dilates that are nonzero at `ξ`.
    pub fn overlap(&self, xi: f64) -> usize {
        self.terms(xi).filter(|&j| self.m0.eval_local(xi * 2f64.powi(-j)) != C64::new(0.0, 0.0)).count()
    }
    /// Radial band on which the truncation to `j_range` is exact.
    pub fn safe_band(&self) -> (f64, f64) {
        safe_band(self.m0.support(), self.j_range)
    }
    /// The assembled symbol on the lattice of `grid`.
    pub fn assemble_on(&self, grid: Grid1D) -> Spectrum1D {
        Spectrum1D::from_fn(grid, |xi| self.eval(xi))
    }
}

impl DyadicSymbol2D {
    pub fn new_unchecked(m0: Arc<dyn Symbol2D>, j_range: JRange) -> Self {
        Self { m0, j_range }
    }
    pub fn terms(&self, xi1: f64, xi2: f64) -> std::ops::RangeInclusive<i32> {
        scales(self.m0.support(), xi1.hypot(xi2), self.j_range)
    }
    pub fn eval(&self, xi1: f64, xi2: f64) -> C64 {
        self.terms(xi1, xi2)
            .map(|j| {
                let s = 2f64.powi(-j);
                self.m0.eval(xi1 * s, xi2 * s)
            })
            .sum()
    }
    pub fn safe_band(&self) -> (f64, f64) {
        safe_band(self.m0.support(), self.j_range)
    }
    /// Symbol of the transposed operator.
    pub fn transpose(&self, slot: Slot) -> Self {
        Self { m0: Arc::new(TransposedSymbol { inner: self.m0.clone(), slot }), j_range: self.j_range }
    }
}

fn safe_band(support: (f64, f64), range: JRange) -> (f64, f64) {
    match range {
        None => (0.0, f64::INFINITY),
        Some((lo, hi)) => (2f64.powi(lo) * support.1, 2f64.powi(hi) * support.0),
    }
}
