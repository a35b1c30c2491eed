//! Periodic band-limited functions on uniform grids in one and two dimensions.
//!
//! Transform convention: `f̂(ξ) = ∫ f(x) e^{-2πi x ξ} dx`, approximated by
//! `h^n Σ f(x_i) e^{-2πi x_i ξ}` on the lattice `ξ = m/L`, `m ∈ [-M/2, M/2)`.
//! Coefficients are stored in FFT slot order; `Grid1D::freq_index` maps a slot
//! to its centered integer `m`.
//!
//! A grid carries a center `c`; samples sit at `x_i = c - L/2 + i h`. The
//! transform uses the true coordinates, so a function stored on a shifted
//! window has the same spectrum as on a centered one (up to periodization).
//! Periodization is the only error source for decaying data: anything not
//! below round-off at the window edge aliases onto the opposite side.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized in-place FFT (`inverse` uses `e^{+2πi}`).
pub fn fft_in_place(buf: &mut [C64], inverse: bool) {
    if buf.len() > 1 {
        plan(buf.len(), inverse).process(buf);
    }
}

/// In-place 2D FFT of a row-major `n×n` array.
pub fn fft2_in_place(buf: &mut [C64], n: usize, inverse: bool) {
    assert_eq!(buf.len(), n * n);
    let p = plan(n, inverse);
    buf.par_chunks_mut(n).for_each(|row| p.process(row));
    transpose_square(buf, n);
    buf.par_chunks_mut(n).for_each(|row| p.process(row));
    transpose_square(buf, n);
}

fn transpose_square(buf: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// `e^{2πi c}` with `c` reduced modulo 1 first, so exact dyadic phases stay exact.
pub fn cis_cycles(c: f64) -> C64 {
    let r = c - c.round();
    C64::from_polar(1.0, 2.0 * PI * r)
}

fn check_pow2(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("sample count {m} is not a power of two ≥ 2")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    period: f64,
    samples: usize,
    center: f64,
}

impl Grid1D {
    pub fn new(period: f64, samples: usize) -> Result<Self> {
        check_pow2(samples)?;
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        Ok(Self { period, samples, center: 0.0 })
    }

    /// Same lattice, window moved to be centered at `center`.
    pub fn centered_at(self, center: f64) -> Self {
        Self { center, ..self }
    }

    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn samples(&self) -> usize {
        self.samples
    }
    pub fn spacing(&self) -> f64 {
        self.period / self.samples as f64
    }
    pub fn center(&self) -> f64 {
        self.center
    }
    pub fn start(&self) -> f64 {
        self.center - 0.5 * self.period
    }
    pub fn x(&self, i: usize) -> f64 {
        self.start() + i as f64 * self.spacing()
    }
    pub fn nyquist(&self) -> f64 {
        self.samples as f64 / (2.0 * self.period)
    }
    pub fn freq_index(&self, slot: usize) -> i64 {
        let m = self.samples as i64;
        let s = slot as i64;
        if s < m / 2 {
            s
        } else {
            s - m
        }
    }
    pub fn slot(&self, m: i64) -> Option<usize> {
        let n = self.samples as i64;
        if m < -n / 2 || m >= n / 2 {
            None
        } else {
            Some(m.rem_euclid(n) as usize)
        }
    }
    pub fn freq(&self, slot: usize) -> f64 {
        self.freq_index(slot) as f64 / self.period
    }
    /// Same period and sample count (centers may differ).
    pub fn same_lattice(&self, other: &Self) -> bool {
        self.period == other.period && self.samples == other.samples
    }
    fn start_cycles(&self) -> f64 {
        self.start() / self.period
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    period: f64,
    samples: usize,
    center: (f64, f64),
}

impl Grid2D {
    pub fn new(period: f64, samples: usize) -> Result<Self> {
        let g = Grid1D::new(period, samples)?;
        Ok(Self { period: g.period, samples, center: (0.0, 0.0) })
    }
    pub fn centered_at(self, center: (f64, f64)) -> Self {
        Self { center, ..self }
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn samples(&self) -> usize {
        self.samples
    }
    pub fn spacing(&self) -> f64 {
        self.period / self.samples as f64
    }
    pub fn center(&self) -> (f64, f64) {
        self.center
    }
    pub fn nyquist(&self) -> f64 {
        self.samples as f64 / (2.0 * self.period)
    }
    /// Axis grids (first and second coordinate).
    pub fn axes(&self) -> (Grid1D, Grid1D) {
        let g = Grid1D { period: self.period, samples: self.samples, center: 0.0 };
        (g.centered_at(self.center.0), g.centered_at(self.center.1))
    }
    pub fn point(&self, i1: usize, i2: usize) -> (f64, f64) {
        let (a, b) = self.axes();
        (a.x(i1), b.x(i2))
    }
    pub fn freq_index(&self, slot: usize) -> i64 {
        self.axes().0.freq_index(slot)
    }
    pub fn slot(&self, m: i64) -> Option<usize> {
        self.axes().0.slot(m)
    }
    pub fn same_lattice(&self, other: &Self) -> bool {
        self.period == other.period && self.samples == other.samples
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction1D {
    grid: Grid1D,
    values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum1D {
    grid: Grid1D,
    coeffs: Vec<C64>,
}

impl SampledFunction1D {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.samples {
            return Err(Error::GridMismatch(format!(
                "{} values for {} samples",
                values.len(),
                grid.samples
            )));
        }
        Ok(Self { grid, values })
    }
    pub fn zeros(grid: Grid1D) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.samples] }
    }
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.samples).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }
    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
    /// Largest |Im| over samples.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }
    /// Values on the same lattice re-expressed on a window with another center.
    /// The shift must be a whole number of samples; points outside the source
    /// window are filled with zero (the non-periodized reading).
    pub fn recentered(&self, center: f64) -> Result<Self> {
        let h = self.grid.spacing();
        let shift = (center - self.grid.center) / h;
        let n = shift.round();
        if (shift - n).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!("recentering by {shift} samples")));
        }
        let n = n as i64;
        let m = self.grid.samples as i64;
        let grid = self.grid.centered_at(center);
        let values = (0..m)
            .map(|i| {
                let j = i + n;
                if (0..m).contains(&j) {
                    self.values[j as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(Self { grid, values })
    }

    pub fn forward_transform(&self) -> Spectrum1D {
        let g = self.grid;
        let mut buf = self.values.clone();
        fft_in_place(&mut buf, false);
        let h = g.spacing();
        let sc = g.start_cycles();
        for (slot, c) in buf.iter_mut().enumerate() {
            let m = g.freq_index(slot) as f64;
            *c *= cis_cycles(-sc * m) * h;
        }
        Spectrum1D { grid: g, coeffs: buf }
    }

    /// `h Σ f(x_i) w(x_i)`.
    pub fn quadrature(&self, weight: impl Fn(f64) -> f64) -> C64 {
        let h = self.grid.spacing();
        let mut s = C64::new(0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            s += v * weight(self.grid.x(i));
        }
        s * h
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "re", "im"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record(&[fmt(self.grid.x(i)), fmt(v.re), fmt(v.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `(x, re, im)` rows; the grid is inferred from the abscissae.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_rows(path, 3)?;
        let m = rows.len();
        if m < 2 {
            return Err(Error::InvalidGrid("fewer than two rows".into()));
        }
        let h = rows[1][0] - rows[0][0];
        let grid = Grid1D::new(h * m as f64, m)?;
        let grid = grid.centered_at(rows[0][0] + 0.5 * grid.period());
        for (i, r) in rows.iter().enumerate() {
            if (r[0] - grid.x(i)).abs() > 1e-9 * grid.period() {
                return Err(Error::InvalidGrid(format!("row {i} is off the uniform lattice")));
            }
        }
        let values = rows.iter().map(|r| C64::new(r[1], r[2])).collect();
        Self::new(grid, values)
    }
}

impl Spectrum1D {
    pub fn new(grid: Grid1D, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.samples {
            return Err(Error::GridMismatch("coefficient count".into()));
        }
        Ok(Self { grid, coeffs })
    }
    /// Coefficients from a function of the frequency `ξ = m/L`.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let coeffs = (0..grid.samples).map(|s| f(grid.freq(s))).collect();
        Self { grid, coeffs }
    }
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    /// Slot-ordered coefficients.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }
    pub fn coeff(&self, m: i64) -> C64 {
        self.grid.slot(m).map_or(C64::new(0.0, 0.0), |s| self.coeffs[s])
    }
    /// Pointwise multiplier `ξ ↦ sym(ξ)`.
    pub fn multiply(&self, sym: impl Fn(f64) -> C64) -> Self {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(s, &c)| c * sym(self.grid.freq(s))).collect();
        Self { grid: self.grid, coeffs }
    }
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch("spectra on different lattices".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, coeffs })
    }
    /// Largest `|m|` whose coefficient exceeds `tol · max|coeff|`.
    pub fn band_index(&self, tol: f64) -> i64 {
        let peak = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0;
        }
        let mut b = 0;
        for (s, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol * peak {
                b = b.max(self.grid.freq_index(s).abs());
            }
        }
        b
    }
    /// `(1/L) Σ |f̂|²`, which equals `∫|f|²` on the torus.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.period
    }
    pub fn inverse_transform(&self) -> SampledFunction1D {
        let g = self.grid;
        let sc = g.start_cycles();
        let mut buf: Vec<C64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(slot, &c)| c * cis_cycles(sc * g.freq_index(slot) as f64))
            .collect();
        fft_in_place(&mut buf, true);
        let norm = 1.0 / g.period;
        for v in &mut buf {
            *v *= norm;
        }
        SampledFunction1D { grid: g, values: buf }
    }
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["m", "re", "im"])?;
        let m = self.grid.samples as i64;
        for k in -m / 2..m / 2 {
            let c = self.coeff(k);
            w.write_record(&[k.to_string(), fmt(c.re), fmt(c.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn same_grid(a: &Grid1D, b: &Grid1D) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Shortest form that parses back to the same f64.
pub(crate) fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn read_rows(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::InvalidGrid(format!("expected {cols} columns, got {}", rec.len())));
        }
        let row: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::InvalidGrid(e.to_string()))?);
    }
    Ok(rows)
}

pub(crate) fn read_csv_rows(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>> {
    read_rows(path, cols)
}

pub fn forward_transform(f: &SampledFunction1D) -> Spectrum1D {
    f.forward_transform()
}

pub fn inverse_transform(s: &Spectrum1D) -> SampledFunction1D {
    s.inverse_transform()
}

/// Continuum convolution `∫ f(y) g(x-y) dy`, periodized onto the common window.
pub fn convolve(f: &SampledFunction1D, g: &SampledFunction1D) -> Result<SampledFunction1D> {
    same_grid(&f.grid, &g.grid)?;
    let s = f.forward_transform().zip_with(&g.forward_transform(), |a, b| a * b)?;
    Ok(s.inverse_transform())
}

/// `h ↦ h_j = 2^j h(2^j ·)`.
///
/// `j < 0` rescales frequency indices (`ĥ_j(m/L) = ĥ(2^{|j|} m/L)`), exact on the lattice.
/// `j > 0` rescales sample indices and zero-fills beyond the source window;
/// it needs the dilated band inside Nyquist and a window center on the lattice.
pub fn dyadic_dilate(f: &SampledFunction1D, j: i32) -> Result<SampledFunction1D> {
    let g = f.grid;
    if j == 0 {
        return Ok(f.clone());
    }
    if j < 0 {
        let s = f.forward_transform();
        let r = 1i64 << (-j);
        let mut out = vec![C64::new(0.0, 0.0); g.samples];
        for (slot, c) in out.iter_mut().enumerate() {
            *c = s.coeff(g.freq_index(slot) * r);
        }
        return Ok(Spectrum1D { grid: g, coeffs: out }.inverse_transform());
    }
    let band = f.forward_transform().band_index(1e-13);
    let half = g.samples as i64 / 2;
    if band << j >= half {
        return Err(Error::Nyquist(format!(
            "band index {band} dilated by 2^{j} leaves [-{half}, {half})"
        )));
    }
    let h = g.spacing();
    let s0 = g.start() / h;
    if (s0 - s0.round()).abs() > 1e-9 {
        return Err(Error::InvalidGrid("window start is not on the lattice".into()));
    }
    let s0 = s0.round() as i64;
    let r = 1i64 << j;
    let m = g.samples as i64;
    let scale = r as f64;
    let values = (0..m)
        .map(|i| {
            let src = r * i + (r - 1) * s0;
            if (0..m).contains(&src) {
                f.values[src as usize] * scale
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(SampledFunction1D { grid: g, values })
}

pub fn quadrature(f: &SampledFunction1D, weight: impl Fn(f64) -> f64) -> C64 {
    f.quadrature(weight)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction2D {
    grid: Grid2D,
    values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum2D {
    grid: Grid2D,
    coeffs: Vec<C64>,
}

impl SampledFunction2D {
    pub fn new(grid: Grid2D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.samples * grid.samples {
            return Err(Error::GridMismatch("value count".into()));
        }
        Ok(Self { grid, values })
    }
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.samples * grid.samples] }
    }
    /// Row-major samples, first index along the first coordinate.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let n = grid.samples;
        let (a, b) = grid.axes();
        let mut values = vec![C64::new(0.0, 0.0); n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i1, row)| {
            let x1 = a.x(i1);
            for (i2, v) in row.iter_mut().enumerate() {
                *v = f(x1, b.x(i2));
            }
        });
        Self { grid, values }
    }
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn values(&self) -> &[C64] {
        &self.values
    }
    pub fn at(&self, i1: usize, i2: usize) -> C64 {
        self.values[i1 * self.grid.samples + i2]
    }
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }
    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("2D grids differ".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }
    pub fn forward_transform(&self) -> Spectrum2D {
        let g = self.grid;
        let n = g.samples;
        let mut buf = self.values.clone();
        fft2_in_place(&mut buf, n, false);
        let (a, b) = g.axes();
        let (s1, s2) = (a.start_cycles(), b.start_cycles());
        let h2 = g.spacing() * g.spacing();
        let ph1: Vec<C64> = (0..n).map(|s| cis_cycles(-s1 * a.freq_index(s) as f64)).collect();
        let ph2: Vec<C64> = (0..n).map(|s| cis_cycles(-s2 * b.freq_index(s) as f64)).collect();
        buf.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
            for (c, v) in row.iter_mut().enumerate() {
                *v *= ph1[r] * ph2[c] * h2;
            }
        });
        Spectrum2D { grid: g, coeffs: buf }
    }
    pub fn quadrature(&self, weight: impl Fn(f64, f64) -> f64 + Sync) -> C64 {
        let g = self.grid;
        let n = g.samples;
        let (a, b) = g.axes();
        let h2 = g.spacing() * g.spacing();
        let rows: Vec<C64> = self
            .values
            .par_chunks(n)
            .enumerate()
            .map(|(i1, row)| {
                let x1 = a.x(i1);
                row.iter().enumerate().map(|(i2, v)| v * weight(x1, b.x(i2))).sum::<C64>()
            })
            .collect();
        rows.iter().sum::<C64>() * h2
    }
    /// `h² Σ |f(x)| w(x)`.
    pub fn quadrature_abs(&self, weight: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
        let g = self.grid;
        let n = g.samples;
        let (a, b) = g.axes();
        let h2 = g.spacing() * g.spacing();
        let rows: Vec<f64> = self
            .values
            .par_chunks(n)
            .enumerate()
            .map(|(i1, row)| {
                let x1 = a.x(i1);
                row.iter().enumerate().map(|(i2, v)| v.norm() * weight(x1, b.x(i2))).sum::<f64>()
            })
            .collect();
        rows.iter().sum::<f64>() * h2
    }
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x1", "x2", "re", "im"])?;
        let n = self.grid.samples;
        for i1 in 0..n {
            for i2 in 0..n {
                let (x1, x2) = self.grid.point(i1, i2);
                let v = self.at(i1, i2);
                w.write_record(&[fmt(x1), fmt(x2), fmt(v.re), fmt(v.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_rows(path, 4)?;
        let m = (rows.len() as f64).sqrt().round() as usize;
        if m * m != rows.len() || m < 2 {
            return Err(Error::InvalidGrid("row count is not a square".into()));
        }
        let h = rows[1][1] - rows[0][1];
        let grid = Grid2D::new(h * m as f64, m)?;
        let half = 0.5 * grid.period();
        let grid = grid.centered_at((rows[0][0] + half, rows[0][1] + half));
        for (k, r) in rows.iter().enumerate() {
            let (x1, x2) = grid.point(k / m, k % m);
            if (r[0] - x1).abs() > 1e-9 * grid.period() || (r[1] - x2).abs() > 1e-9 * grid.period() {
                return Err(Error::InvalidGrid(format!("row {k} is off the lattice")));
            }
        }
        Self::new(grid, rows.iter().map(|r| C64::new(r[2], r[3])).collect())
    }
}

impl Spectrum2D {
    pub fn new(grid: Grid2D, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.samples * grid.samples {
            return Err(Error::GridMismatch("coefficient count".into()));
        }
        Ok(Self { grid, coeffs })
    }
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let n = grid.samples;
        let l = grid.period;
        let mut coeffs = vec![C64::new(0.0, 0.0); n * n];
        coeffs.par_chunks_mut(n).enumerate().for_each(|(s1, row)| {
            let xi1 = grid.freq_index(s1) as f64 / l;
            for (s2, v) in row.iter_mut().enumerate() {
                *v = f(xi1, grid.freq_index(s2) as f64 / l);
            }
        });
        Self { grid, coeffs }
    }
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
    pub fn coeff(&self, m1: i64, m2: i64) -> C64 {
        match (self.grid.slot(m1), self.grid.slot(m2)) {
            (Some(a), Some(b)) => self.coeffs[a * self.grid.samples + b],
            _ => C64::new(0.0, 0.0),
        }
    }
    pub fn multiply(&self, sym: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        let g = self.grid;
        let n = g.samples;
        let l = g.period;
        let mut coeffs = self.coeffs.clone();
        coeffs.par_chunks_mut(n).enumerate().for_each(|(s1, row)| {
            let xi1 = g.freq_index(s1) as f64 / l;
            for (s2, v) in row.iter_mut().enumerate() {
                *v *= sym(xi1, g.freq_index(s2) as f64 / l);
            }
        });
        Self { grid: g, coeffs }
    }
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / (self.grid.period * self.grid.period)
    }
    pub fn inverse_transform(&self) -> SampledFunction2D {
        let g = self.grid;
        let n = g.samples;
        let (a, b) = g.axes();
        let (s1, s2) = (a.start_cycles(), b.start_cycles());
        let ph1: Vec<C64> = (0..n).map(|s| cis_cycles(s1 * a.freq_index(s) as f64)).collect();
        let ph2: Vec<C64> = (0..n).map(|s| cis_cycles(s2 * b.freq_index(s) as f64)).collect();
        let norm = 1.0 / (g.period * g.period);
        let mut buf = self.coeffs.clone();
        buf.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
            for (c, v) in row.iter_mut().enumerate() {
                *v *= ph1[r] * ph2[c] * norm;
            }
        });
        fft2_in_place(&mut buf, n, true);
        SampledFunction2D { grid: g, values: buf }
    }
}

/// 2D analogue of [`dyadic_dilate`]: `h_j = 2^{2j} h(2^j ·)`.
pub fn dyadic_dilate_2d(f: &SampledFunction2D, j: i32) -> Result<SampledFunction2D> {
    let g = f.grid;
    let n = g.samples;
    if j == 0 {
        return Ok(f.clone());
    }
    if j < 0 {
        let s = f.forward_transform();
        let r = 1i64 << (-j);
        let coeffs = (0..n * n)
            .map(|k| s.coeff(g.freq_index(k / n) * r, g.freq_index(k % n) * r))
            .collect();
        return Ok(Spectrum2D { grid: g, coeffs }.inverse_transform());
    }
    let s = f.forward_transform();
    let peak = s.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut band = 0i64;
    for (k, c) in s.coeffs.iter().enumerate() {
        if c.norm() > 1e-13 * peak {
            band = band.max(g.freq_index(k / n).abs()).max(g.freq_index(k % n).abs());
        }
    }
    let half = n as i64 / 2;
    if band << j >= half {
        return Err(Error::Nyquist(format!("2D band {band} dilated by 2^{j} leaves the grid")));
    }
    let h = g.spacing();
    let (a, b) = g.axes();
    let (o1, o2) = (a.start() / h, b.start() / h);
    if (o1 - o1.round()).abs() > 1e-9 || (o2 - o2.round()).abs() > 1e-9 {
        return Err(Error::InvalidGrid("window start is not on the lattice".into()));
    }
    let (o1, o2) = (o1.round() as i64, o2.round() as i64);
    let r = 1i64 << j;
    let m = n as i64;
    let scale = (r * r) as f64;
    let values = (0..n * n)
        .map(|k| {
            let s1 = r * (k / n) as i64 + (r - 1) * o1;
            let s2 = r * (k % n) as i64 + (r - 1) * o2;
            if (0..m).contains(&s1) && (0..m).contains(&s2) {
                f.values[(s1 * m + s2) as usize] * scale
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(SampledFunction2D { grid: g, values })
}
