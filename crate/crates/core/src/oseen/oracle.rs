//! Fully spectral two-dimensional counterparts of the kernel path: the
//! projected divergence `P div F`, the multiplier solution of the linear
//! problem, and residuals of the defining equations.

use num_complex::Complex64;

use super::kernels::{apply_d0, apply_d1, apply_tilde_d0_d3, apply_tilde_d1_d2, OseenConfig};
use crate::error::Result;
use crate::field::{check_same_grid, ScalarField, SemiSpectralField, TensorForcing, VectorField};
use crate::grid::Grid2;
use crate::spectral::{
    dealiased_product, derivative_symbol, dx1_spectral, fft2, ifft2, Spectrum2,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// True for coefficients dropped by every 2D multiplier: the mean and the
/// Nyquist row and column, which odd symbols cannot keep real.
fn dropped(grid: &Grid2, i: usize, k: usize) -> bool {
    (i == 0 && k == 0) || grid.is_nyquist1(i) || grid.is_nyquist2(k)
}

struct TensorSpectrum {
    f11: Spectrum2,
    f12: Spectrum2,
    f21: Spectrum2,
    f22: Spectrum2,
}

impl TensorSpectrum {
    fn new(f: &TensorForcing) -> Self {
        Self {
            f11: fft2(&f.f11),
            f12: fft2(&f.f12),
            f21: fft2(&f.f21),
            f22: fft2(&f.f22),
        }
    }

    fn grid(&self) -> Grid2 {
        self.f11.grid
    }
}

/// `P div F` from the definition `P = I - xi xi^T / |xi|^2` applied to
/// `(div F)_j = i xi_k F_jk`.
fn pdiv_primitive(t: &TensorSpectrum) -> (Spectrum2, Spectrum2) {
    let grid = t.grid();
    let mut p1 = t.f11.clone();
    let mut p2 = t.f11.clone();
    for i in 0..grid.n1() {
        let x1 = grid.xi1(i);
        for k in 0..grid.n2() {
            let idx = grid.index(i, k);
            if dropped(&grid, i, k) {
                p1.data[idx] = ZERO;
                p2.data[idx] = ZERO;
                continue;
            }
            let x2 = grid.xi2(k);
            let iu = Complex64::new(0.0, 1.0);
            let d1 = iu * x1 * t.f11.data[idx] + iu * x2 * t.f12.data[idx];
            let d2 = iu * x1 * t.f21.data[idx] + iu * x2 * t.f22.data[idx];
            let r = x1 * x1 + x2 * x2;
            p1.data[idx] = d1 * (1.0 - x1 * x1 / r) - d2 * (x1 * x2 / r);
            p2.data[idx] = d2 * (1.0 - x2 * x2 / r) - d1 * (x1 * x2 / r);
        }
    }
    (p1, p2)
}

/// `P div F` from the reduced form in which only `F21`, `F12 + F21` and
/// `F11 - F22` appear:
/// `(P div F)_1 = -[b F21 + (b^3 s + a b^2 d) / |xi|^2]`,
/// `(P div F)_2 = -[b d - a F21 + (b^3 d - a b^2 s) / |xi|^2]`,
/// with `a = i xi1`, `b = i xi2`.
fn pdiv_reduced(t: &TensorSpectrum) -> (Spectrum2, Spectrum2) {
    let grid = t.grid();
    let mut p1 = t.f11.clone();
    let mut p2 = t.f11.clone();
    for i in 0..grid.n1() {
        let x1 = grid.xi1(i);
        for k in 0..grid.n2() {
            let idx = grid.index(i, k);
            if dropped(&grid, i, k) {
                p1.data[idx] = ZERO;
                p2.data[idx] = ZERO;
                continue;
            }
            let x2 = grid.xi2(k);
            let a = Complex64::new(0.0, x1);
            let b = Complex64::new(0.0, x2);
            let r = x1 * x1 + x2 * x2;
            let f21 = t.f21.data[idx];
            let s = t.f12.data[idx] + f21;
            let d = t.f11.data[idx] - t.f22.data[idx];
            p1.data[idx] = -(b * f21 + (b * b * b * s + a * b * b * d) / r);
            p2.data[idx] = -(b * d - a * f21 + (b * b * b * d - a * b * b * s) / r);
        }
    }
    (p1, p2)
}

/// `P div F` in physical space.
pub fn helmholtz_project_div(f: &TensorForcing) -> Result<VectorField> {
    let (p1, p2) = pdiv_primitive(&TensorSpectrum::new(f));
    VectorField::new(ifft2(&p1), ifft2(&p2))
}

/// Largest per-mode difference between the reduced and primitive forms of
/// `P div F`, relative to the largest coefficient.
pub fn pdiv_form_discrepancy(f: &TensorForcing) -> f64 {
    let t = TensorSpectrum::new(f);
    let (a1, a2) = pdiv_primitive(&t);
    let (b1, b2) = pdiv_reduced(&t);
    let mut diff = 0.0f64;
    let mut peak = 0.0f64;
    for (x, y) in a1.data.iter().chain(&a2.data).zip(b1.data.iter().chain(&b2.data)) {
        diff = diff.max((x - y).norm());
        peak = peak.max(x.norm());
    }
    if peak == 0.0 {
        0.0
    } else {
        diff / peak
    }
}

/// `u = (|xi|^2 + i alpha xi1)^{-1} (P div F)`, the mean mode set to zero.
pub fn oseen_oracle(f: &TensorForcing, cfg: &OseenConfig) -> Result<VectorField> {
    let (p1, p2) = pdiv_primitive(&TensorSpectrum::new(f));
    let alpha = cfg.alpha;
    let grid = p1.grid;
    let inv = move |i: usize, k: usize, x1: f64, x2: f64| {
        if dropped(&grid, i, k) {
            ZERO
        } else {
            Complex64::new(x1 * x1 + x2 * x2, alpha * x1).inv()
        }
    };
    VectorField::new(ifft2(&p1.map(inv)), ifft2(&p2.map(inv)))
}

/// `max |xi . u^| / max |xi| |u^|` over all modes.
pub fn divergence_defect(u: &VectorField) -> f64 {
    let s1 = fft2(&u.u1);
    let s2 = fft2(&u.u2);
    let grid = s1.grid;
    let mut div = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..grid.n1() {
        let x1 = grid.xi1(i);
        for k in 0..grid.n2() {
            if grid.is_nyquist1(i) || grid.is_nyquist2(k) {
                continue;
            }
            let x2 = grid.xi2(k);
            let a = s1.get(i, k);
            let b = s2.get(i, k);
            div = div.max((a * x1 + b * x2).norm());
            scale = scale.max((x1 * x1 + x2 * x2).sqrt() * a.norm().max(b.norm()));
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        div / scale
    }
}

/// Spectral divergence `d1 u1 + d2 u2` as a field.
pub fn spectral_divergence(u: &VectorField) -> Result<ScalarField> {
    let s1 = fft2(&u.u1).map(|i, k, x1, _| {
        if u.grid().is_nyquist1(i) || u.grid().is_nyquist2(k) {
            ZERO
        } else {
            Complex64::new(0.0, x1)
        }
    });
    let s2 = fft2(&u.u2).map(|i, k, _, x2| {
        if u.grid().is_nyquist1(i) || u.grid().is_nyquist2(k) {
            ZERO
        } else {
            Complex64::new(0.0, x2)
        }
    });
    Ok(ifft2(&s1.zip_with(&s2, |a, b| a + b)?))
}

/// Interior maximum of `|x|` over `|x1| <= L1 / 2`.
pub fn interior_max(f: &ScalarField) -> f64 {
    let g = f.grid();
    g.interior1()
        .flat_map(|i| f.row(i).iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
}

/// Interior maximum relative difference `max |a - b| / max |b|` over both
/// components.
pub fn interior_relative_error(a: &VectorField, b: &VectorField) -> Result<f64> {
    let d = a.minus(b)?;
    let num = interior_max(&d.u1).max(interior_max(&d.u2));
    let den = interior_max(&b.u1).max(interior_max(&b.u2));
    Ok(if den == 0.0 { num } else { num / den })
}

/// `F - u (x) u` with dealiased products.
pub fn nonlinear_forcing(f: &TensorForcing, u: &VectorField) -> Result<TensorForcing> {
    let uu = TensorForcing::outer_with(u, u, dealiased_product)?;
    f.minus(&uu)
}

/// Relative interior residual of `-Delta u + alpha d1 u = P div (F - u (x) u)`
/// (or of the linear problem when `quadratic` is false), normalized by the
/// right-hand side.
pub fn pde_residual(u: &VectorField, f: &TensorForcing, alpha: f64, quadratic: bool) -> Result<f64> {
    check_same_grid(u.grid(), f.grid())?;
    let rhs_tensor = if quadratic {
        nonlinear_forcing(f, u)?
    } else {
        f.clone()
    };
    let rhs = helmholtz_project_div(&rhs_tensor)?;
    let op = |c: &ScalarField| {
        let grid = *c.grid();
        ifft2(&fft2(c).map(|i, k, x1, x2| {
            if dropped(&grid, i, k) {
                ZERO
            } else {
                Complex64::new(x1 * x1 + x2 * x2, alpha * x1)
            }
        }))
    };
    let lhs = VectorField::new(op(&u.u1), op(&u.u2))?;
    let diff = lhs.minus(&rhs)?;
    let num = interior_max(&diff.u1).max(interior_max(&diff.u2));
    let den = interior_max(&rhs.u1).max(interior_max(&rhs.u2));
    Ok(if den == 0.0 { num } else { num / den })
}

/// The four per-mode kernel operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    D0,
    D1,
    TildeD0D3,
    TildeD1D2,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [Self::D0, Self::D1, Self::TildeD0D3, Self::TildeD1D2];

    pub fn id(&self) -> &'static str {
        match self {
            Self::D0 => "D0",
            Self::D1 => "D1",
            Self::TildeD0D3 => "tildeD0_d3",
            Self::TildeD1D2 => "tildeD1_d2",
        }
    }

    pub fn apply(&self, gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
        match self {
            Self::D0 => apply_d0(gh, cfg),
            Self::D1 => apply_d1(gh, cfg),
            Self::TildeD0D3 => apply_tilde_d0_d3(gh, cfg),
            Self::TildeD1D2 => apply_tilde_d1_d2(gh, cfg),
        }
    }

    /// Plane-wave response to `e^{i omega x1}` on mode `xi`.
    pub fn symbol(&self, alpha: f64, omega: f64, xi: f64) -> Complex64 {
        let oseen = Complex64::new(-omega * omega - xi * xi, -alpha * omega);
        let iw = Complex64::new(0.0, omega);
        let lap = omega * omega + xi * xi;
        match self {
            Self::D0 => oseen.inv(),
            Self::D1 => iw / oseen,
            Self::TildeD0D3 => derivative_symbol(xi, 3) / (oseen * lap),
            Self::TildeD1D2 => iw * derivative_symbol(xi, 2) / (oseen * lap),
        }
    }
}

/// Relative interior residual of the defining ODE of `kind` applied to `gh`.
///
/// With `L = d^2 - alpha d - xi^2` in x1 the equations are `L w = g`,
/// `L w = g'`, `(xi^2 - d^2) L w = (i xi)^3 g` and
/// `(xi^2 - d^2) L w = (i xi)^2 g'`; x1 derivatives are spectral. On the
/// `xi2 = 0` row the right-hand side is taken mean-free in x1.
pub fn ode_residual(kind: KernelKind, gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<f64> {
    let w = kind.apply(gh, cfg)?;
    let grid = *gh.grid();
    let alpha = cfg.alpha;
    let w1 = dx1_spectral(&w, 1);
    let w2 = dx1_spectral(&w, 2);
    let lw = SemiSpectralField::new(
        grid,
        w.values()
            .iter()
            .zip(w1.values())
            .zip(w2.values())
            .enumerate()
            .map(|(idx, ((w0, w1), w2))| {
                let xi = grid.xi2(idx % grid.n2());
                w2 - w1 * alpha - w0 * (xi * xi)
            })
            .collect(),
    )?;
    let (lhs, rhs) = match kind {
        KernelKind::D0 => (lw, gh.clone()),
        KernelKind::D1 => (lw, dx1_spectral(gh, 1)),
        KernelKind::TildeD0D3 | KernelKind::TildeD1D2 => {
            let l2 = dx1_spectral(&lw, 2);
            let outer = lw
                .map_modes(|_, xi| Complex64::new(xi * xi, 0.0))
                .minus(&l2)?;
            let rhs = if kind == KernelKind::TildeD0D3 {
                gh.map_modes(|k, xi| {
                    if grid.is_nyquist2(k) {
                        ZERO
                    } else {
                        derivative_symbol(xi, 3)
                    }
                })
            } else {
                dx1_spectral(gh, 1).map_modes(|_, xi| derivative_symbol(xi, 2))
            };
            (outer, rhs)
        }
    };
    let mut rhs = rhs;
    let mean: Complex64 = rhs.column(0).iter().sum::<Complex64>() / grid.n1() as f64;
    let col0: Vec<Complex64> = rhs.column(0).iter().map(|v| v - mean).collect();
    rhs.set_column(0, &col0);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in grid.interior1() {
        for k in 0..grid.n2() {
            num = num.max((lhs.get(i, k) - rhs.get(i, k)).norm());
            den = den.max(rhs.get(i, k).norm());
        }
    }
    Ok(if den == 0.0 { num } else { num / den })
}
