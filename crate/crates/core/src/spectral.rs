//! Transforms between physical samples and the semi-spectral representation.
//!
//! The semi-spectral coefficient of mode `k` approximates the continuous
//! transform `\int f(x2) e^{-i xi2 x2} dx2` by the rectangle rule:
//! `g_k = h2 (-1)^k DFT_k(f)`, the sign coming from the grid starting at `-L2`.
//! The inverse is `f(x2) = (1 / 2 L2) sum_k g_k e^{i xi2_k x2}`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{check_same_grid, ScalarField, SemiSpectralField};
use crate::grid::Grid2;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Relative Hermitian defect above which [`to_physical`] rejects its input.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// What to do with a semi-spectral field that is not Hermitian in xi2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryPolicy {
    #[default]
    Reject,
    Symmetrize,
}

fn alternating(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward transform along x2.
pub fn to_semispectral(f: &ScalarField) -> SemiSpectralField {
    let grid = *f.grid();
    let n2 = grid.n2();
    let h2 = grid.h2();
    let fft = forward_plan(n2);
    let mut values: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in values.chunks_exact_mut(n2) {
        fft.process(row);
        for (k, v) in row.iter_mut().enumerate() {
            *v *= h2 * alternating(k);
        }
    }
    SemiSpectralField::from_raw(grid, values)
}

/// Largest `|g(-k) - conj g(k)|` relative to the largest coefficient.
pub fn hermitian_defect(fh: &SemiSpectralField) -> f64 {
    let grid = fh.grid();
    let peak = fh.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..grid.n1() {
        for k in 0..=grid.n2() / 2 {
            let a = fh.get(i, k);
            let b = fh.get(i, grid.mirror2(k));
            worst = worst.max((b - a.conj()).norm());
        }
    }
    worst / peak
}

/// Replaces every pair `(g(k), g(-k))` by its Hermitian part.
pub fn symmetrize(fh: &SemiSpectralField) -> SemiSpectralField {
    let grid = *fh.grid();
    let mut out = fh.clone();
    for i in 0..grid.n1() {
        for k in 0..=grid.n2() / 2 {
            let m = grid.mirror2(k);
            let avg = 0.5 * (fh.get(i, k) + fh.get(i, m).conj());
            out.set(i, k, avg);
            out.set(i, m, avg.conj());
        }
    }
    out
}

/// Inverse transform along x2, rejecting non-Hermitian input.
pub fn to_physical(fh: &SemiSpectralField) -> Result<ScalarField> {
    to_physical_with(fh, SymmetryPolicy::Reject)
}

pub fn to_physical_with(fh: &SemiSpectralField, policy: SymmetryPolicy) -> Result<ScalarField> {
    let defect = hermitian_defect(fh);
    if defect > HERMITIAN_TOL {
        match policy {
            SymmetryPolicy::Reject => return Err(Error::NotHermitian { defect }),
            SymmetryPolicy::Symmetrize => return Ok(to_physical_unchecked(&symmetrize(fh))),
        }
    }
    Ok(to_physical_unchecked(fh))
}

/// Inverse transform keeping only the real part, for inputs that are
/// Hermitian by construction.
pub(crate) fn to_physical_unchecked(fh: &SemiSpectralField) -> ScalarField {
    let grid = *fh.grid();
    let n2 = grid.n2();
    let scale = 1.0 / (2.0 * grid.l2());
    let ifft = inverse_plan(n2);
    let mut row = vec![Complex64::new(0.0, 0.0); n2];
    let mut out = Vec::with_capacity(grid.len());
    for src in fh.values().chunks_exact(n2) {
        for (k, (d, s)) in row.iter_mut().zip(src).enumerate() {
            *d = s * (scale * alternating(k));
        }
        ifft.process(&mut row);
        out.extend(row.iter().map(|v| v.re));
    }
    ScalarField::from_raw(grid, out)
}

/// `(i xi)^order`, with `xi^order` formed by repeated multiplication.
pub fn derivative_symbol(xi: f64, order: u32) -> Complex64 {
    let mut mag = 1.0;
    for _ in 0..order {
        mag *= xi;
    }
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Multiplies by `(i xi2)^order`. Odd orders zero the Nyquist mode, which has
/// no Hermitian partner.
pub fn dx2_multiplier(fh: &SemiSpectralField, order: u32) -> SemiSpectralField {
    let grid = *fh.grid();
    fh.map_modes(|k, xi| {
        if order % 2 == 1 && grid.is_nyquist2(k) {
            Complex64::new(0.0, 0.0)
        } else {
            derivative_symbol(xi, order)
        }
    })
}

/// Spectral x1 derivative of every mode column on the periodic x1 domain.
pub fn dx1_spectral(fh: &SemiSpectralField, order: u32) -> SemiSpectralField {
    let grid = *fh.grid();
    let n1 = grid.n1();
    let fft = forward_plan(n1);
    let ifft = inverse_plan(n1);
    let symbols: Vec<Complex64> = (0..n1)
        .map(|i| {
            if order % 2 == 1 && grid.is_nyquist1(i) {
                Complex64::new(0.0, 0.0)
            } else {
                derivative_symbol(grid.xi1(i), order) / n1 as f64
            }
        })
        .collect();
    let mut out = SemiSpectralField::zeros(grid);
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for k in 0..grid.n2() {
        for (i, c) in col.iter_mut().enumerate() {
            *c = fh.get(i, k);
        }
        fft.process(&mut col);
        for (c, s) in col.iter_mut().zip(&symbols) {
            *c *= s;
        }
        ifft.process(&mut col);
        out.set_column(k, &col);
    }
    out
}

/// Raw two-dimensional DFT of a real field, x1 outer and x2 inner.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2 {
    pub grid: Grid2,
    pub data: Vec<Complex64>,
}

impl Spectrum2 {
    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.data[self.grid.index(i, k)]
    }

    /// Applies `m(i, k, xi1, xi2)` to every coefficient.
    pub fn map(&self, m: impl Fn(usize, usize, f64, f64) -> Complex64) -> Self {
        let g = self.grid;
        let mut data = self.data.clone();
        for i in 0..g.n1() {
            let xi1 = g.xi1(i);
            for k in 0..g.n2() {
                data[g.index(i, k)] *= m(i, k, xi1, g.xi2(k));
            }
        }
        Self { grid: g, data }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

fn transform_columns(grid: &Grid2, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
    let n1 = grid.n1();
    let n2 = grid.n2();
    let mut col = vec![Complex64::new(0.0, 0.0); n1];
    for k in 0..n2 {
        for (i, c) in col.iter_mut().enumerate() {
            *c = data[i * n2 + k];
        }
        fft.process(&mut col);
        for (i, c) in col.iter().enumerate() {
            data[i * n2 + k] = *c;
        }
    }
}

pub fn fft2(f: &ScalarField) -> Spectrum2 {
    let grid = *f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let row_fft = forward_plan(grid.n2());
    for row in data.chunks_exact_mut(grid.n2()) {
        row_fft.process(row);
    }
    transform_columns(&grid, &mut data, &forward_plan(grid.n1()));
    Spectrum2 { grid, data }
}

/// Inverse of [`fft2`], keeping the real part.
pub fn ifft2(s: &Spectrum2) -> ScalarField {
    let grid = s.grid;
    let mut data = s.data.clone();
    transform_columns(&grid, &mut data, &inverse_plan(grid.n1()));
    let row_fft = inverse_plan(grid.n2());
    for row in data.chunks_exact_mut(grid.n2()) {
        row_fft.process(row);
    }
    let scale = 1.0 / grid.len() as f64;
    ScalarField::from_raw(grid, data.iter().map(|v| v.re * scale).collect())
}

/// Pointwise product with 3/2-rule zero padding along x2.
///
/// Each row is interpolated onto `3 N2 / 2` points, multiplied there and
/// truncated back, so products of resolved modes do not alias.
pub fn dealiased_product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    check_same_grid(f.grid(), g.grid())?;
    let grid = *f.grid();
    let n = grid.n2();
    let m = 3 * n / 2;
    let half = n / 2;
    let fwd_n = forward_plan(n);
    let inv_n = inverse_plan(n);
    let fwd_m = forward_plan(m);
    let inv_m = inverse_plan(m);
    let zero = Complex64::new(0.0, 0.0);

    let pad = |spec: &[Complex64], out: &mut Vec<Complex64>| {
        out.clear();
        out.resize(m, zero);
        let s = m as f64 / n as f64;
        for k in 0..half {
            out[k] = spec[k] * s;
        }
        for k in 1..half {
            out[m - k] = spec[n - k] * s;
        }
        let nyq = spec[half] * (0.5 * s);
        out[half] = nyq;
        out[m - half] = nyq;
    };

    let mut out = Vec::with_capacity(grid.len());
    let mut a = vec![zero; n];
    let mut b = vec![zero; n];
    let mut pa = Vec::with_capacity(m);
    let mut pb = Vec::with_capacity(m);
    for i in 0..grid.n1() {
        for (d, s) in a.iter_mut().zip(f.row(i)) {
            *d = Complex64::new(*s, 0.0);
        }
        for (d, s) in b.iter_mut().zip(g.row(i)) {
            *d = Complex64::new(*s, 0.0);
        }
        fwd_n.process(&mut a);
        fwd_n.process(&mut b);
        pad(&a, &mut pa);
        pad(&b, &mut pb);
        inv_m.process(&mut pa);
        inv_m.process(&mut pb);
        for (x, y) in pa.iter_mut().zip(&pb) {
            *x = Complex64::new(x.re * y.re / (m * m) as f64, 0.0);
        }
        fwd_m.process(&mut pa);
        let s = n as f64 / m as f64;
        for k in 0..half {
            a[k] = pa[k] * s;
        }
        for k in 1..half {
            a[n - k] = pa[m - k] * s;
        }
        a[half] = (pa[half] + pa[m - half]) * s;
        inv_n.process(&mut a);
        out.extend(a.iter().map(|v| v.re / n as f64));
    }
    Ok(ScalarField::from_raw(grid, out))
}
