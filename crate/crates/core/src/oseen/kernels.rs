//! The per-mode solution operators and the assembly of `D[F]`.
//!
//! Every operator solves, mode by mode in xi2, an instance of
//! `w'' - alpha w' - xi2^2 w = rhs` on the periodic x1 domain.

use log::warn;
use num_complex::Complex64;

use super::eigen::{discriminant_root, eigen_frequencies};
use super::expint::{anticausal, causal, QuadratureRule, Stencil};
use crate::error::{Error, Result};
use crate::field::{check_same_grid, SemiSpectralField, TensorForcing, VectorField};
use crate::grid::Grid2;
use crate::spectral::{to_physical_unchecked, to_semispectral};

/// Boundary level above which a kernel input is reported as not decayed.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OseenConfig {
    pub alpha: f64,
    pub quadrature: QuadratureRule,
}

impl OseenConfig {
    pub fn new(alpha: f64, quadrature: QuadratureRule) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must be positive"
            )));
        }
        Ok(Self { alpha, quadrature })
    }

    pub fn with_alpha(alpha: f64) -> Result<Self> {
        Self::new(alpha, QuadratureRule::default())
    }

    fn check(&self) -> Result<()> {
        Self::new(self.alpha, self.quadrature).map(|_| ())
    }
}

/// Largest coefficient on the two x1 edge rows over the overall peak.
pub fn x1_boundary_level(fh: &SemiSpectralField) -> f64 {
    let peak = fh.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let g = fh.grid();
    let last = g.n1() - 1;
    let edge = (0..g.n2())
        .flat_map(|k| [fh.get(0, k).norm(), fh.get(last, k).norm()])
        .fold(0.0f64, f64::max);
    edge / peak
}

fn warn_boundary(fh: &SemiSpectralField, what: &str) {
    let level = x1_boundary_level(fh);
    if level > BOUNDARY_TOL {
        warn!("{what}: input is {level:e} of its peak at the x1 boundary");
    }
}

/// Per-mode kernels acting on one x1 column.
struct ModeKernels<'a> {
    alpha: f64,
    h: f64,
    stencil: &'a Stencil,
}

impl ModeKernels<'_> {
    /// `-(C_{lambda-} + A_{lambda+}) / sqrt(alpha^2 + 4 xi^2)`.
    fn d0(&self, g: &[Complex64], xi: f64) -> Vec<Complex64> {
        let e = eigen_frequencies(self.alpha, xi);
        let scale = -1.0 / discriminant_root(self.alpha, xi);
        let c = causal(g, e.lambda_minus, self.h, self.stencil);
        let a = anticausal(g, e.lambda_plus, self.h, self.stencil);
        c.iter().zip(&a).map(|(x, y)| (x + y) * scale).collect()
    }

    /// `-(lambda- C_{lambda-} + lambda+ A_{lambda+}) / sqrt(alpha^2 + 4 xi^2)`.
    fn d1(&self, g: &[Complex64], xi: f64) -> Vec<Complex64> {
        let e = eigen_frequencies(self.alpha, xi);
        let scale = -1.0 / discriminant_root(self.alpha, xi);
        let a = anticausal(g, e.lambda_plus, self.h, self.stencil);
        if e.lambda_minus == 0.0 {
            return a.iter().map(|y| y * (e.lambda_plus * scale)).collect();
        }
        let c = causal(g, e.lambda_minus, self.h, self.stencil);
        c.iter()
            .zip(&a)
            .map(|(x, y)| (x * e.lambda_minus + y * e.lambda_plus) * scale)
            .collect()
    }

    /// `int e^{-|xi| |x - y|} g(y) dy`.
    fn symmetric(&self, g: &[Complex64], xi: f64) -> Vec<Complex64> {
        let r = xi.abs();
        let c = causal(g, -r, self.h, self.stencil);
        let a = anticausal(g, r, self.h, self.stencil);
        c.iter().zip(&a).map(|(x, y)| x + y).collect()
    }

    /// `int sgn(x - y) e^{-|xi| |x - y|} g(y) dy`.
    fn antisymmetric(&self, g: &[Complex64], xi: f64) -> Vec<Complex64> {
        let r = xi.abs();
        let c = causal(g, -r, self.h, self.stencil);
        let a = anticausal(g, r, self.h, self.stencil);
        c.iter().zip(&a).map(|(x, y)| x - y).collect()
    }
}

fn scale_col(col: &mut [Complex64], s: Complex64) {
    for v in col.iter_mut() {
        *v *= s;
    }
}

fn add_col(acc: &mut [Complex64], col: &[Complex64], s: f64) {
    for (a, b) in acc.iter_mut().zip(col) {
        *a += b * s;
    }
}

/// Weight `(i xi)^3 / (2 |xi|)` of the fused third-derivative kernel.
fn weight_d3(grid: &Grid2, k: usize) -> Complex64 {
    let xi = grid.xi2(k);
    if xi == 0.0 || grid.is_nyquist2(k) {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -xi.signum() * xi * xi / 2.0)
}

/// Weight `-(i xi)^2 / 2` of the fused second-derivative kernel.
fn weight_d2(grid: &Grid2, k: usize) -> f64 {
    let xi = grid.xi2(k);
    xi * xi / 2.0
}

fn map_columns(
    gh: &SemiSpectralField,
    cfg: &OseenConfig,
    f: impl Fn(&ModeKernels, &[Complex64], usize) -> Option<Vec<Complex64>>,
) -> Result<SemiSpectralField> {
    cfg.check()?;
    let grid = *gh.grid();
    let stencil = cfg.quadrature.stencil();
    let mk = ModeKernels {
        alpha: cfg.alpha,
        h: grid.h1(),
        stencil: &stencil,
    };
    let mut out = SemiSpectralField::zeros(grid);
    for k in 0..grid.n2() {
        let col = gh.column(k);
        if col.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            continue;
        }
        if let Some(res) = f(&mk, &col, k) {
            out.set_column(k, &res);
        }
    }
    Ok(out)
}

/// `D0`: solves `w'' - alpha w' - xi^2 w = g`.
///
/// On the `xi2 = 0` row only the x1-mean-free part of `g` is solvable; the
/// returned row has zero x1-mean.
pub fn apply_d0(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    warn_boundary(gh, "D0");
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| Some(mk.d0(col, grid.xi2(k))))
}

/// `D1 = D0 d/dx1`, via the integrated-by-parts kernels.
pub fn apply_d1(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    warn_boundary(gh, "D1");
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| Some(mk.d1(col, grid.xi2(k))))
}

/// `D0 (-Delta)^{-1} d^3/dx2^3`, regular at `xi2 = 0` where it vanishes.
pub fn apply_tilde_d0_d3(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    warn_boundary(gh, "tilde D0");
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| {
        let w = weight_d3(&grid, k);
        if w == Complex64::new(0.0, 0.0) {
            return None;
        }
        let xi = grid.xi2(k);
        let mut inner = mk.symmetric(col, xi);
        scale_col(&mut inner, w);
        Some(mk.d0(&inner, xi))
    })
}

/// `D0 (-Delta)^{-1} d/dx1 d^2/dx2^2`, regular at `xi2 = 0`.
pub fn apply_tilde_d1_d2(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    warn_boundary(gh, "tilde D1");
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| {
        let w = weight_d2(&grid, k);
        if w == 0.0 {
            return None;
        }
        let xi = grid.xi2(k);
        let mut inner = mk.antisymmetric(col, xi);
        scale_col(&mut inner, Complex64::new(w, 0.0));
        Some(mk.d0(&inner, xi))
    })
}

/// The inner convolutions `int e^{-|xi| |x - y|} g(y) dy` and (with
/// `antisymmetric`) `int sgn(x - y) e^{-|xi| |x - y|} g(y) dy`, rows
/// `xi2 != 0` only.
pub fn exp_convolution(gh: &SemiSpectralField, cfg: &OseenConfig, antisymmetric: bool) -> Result<SemiSpectralField> {
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| {
        let xi = grid.xi2(k);
        if xi == 0.0 {
            None
        } else if antisymmetric {
            Some(mk.antisymmetric(col, xi))
        } else {
            Some(mk.symmetric(col, xi))
        }
    })
}

fn reject_zero_row(gh: &SemiSpectralField, what: &str) -> Result<()> {
    if gh.column(0).iter().any(|v| v.norm() != 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} is singular at xi2 = 0; the input has content there"
        )));
    }
    Ok(())
}

/// Unfused `tilde D0 = D0 (-Delta)^{-1}` with the displayed
/// `-1 / (2 |xi| sqrt(alpha^2 + 4 xi^2))` normalization; only rows with
/// `xi2 != 0` are accepted.
pub fn apply_tilde_d0(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    reject_zero_row(gh, "tilde D0")?;
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| {
        let xi = grid.xi2(k);
        let mut inner = mk.symmetric(col, xi);
        scale_col(&mut inner, Complex64::new(1.0 / (2.0 * xi.abs()), 0.0));
        Some(mk.d0(&inner, xi))
    })
}

/// Unfused `tilde D1 = D0 (-Delta)^{-1} d/dx1`; only rows with `xi2 != 0`.
pub fn apply_tilde_d1(gh: &SemiSpectralField, cfg: &OseenConfig) -> Result<SemiSpectralField> {
    reject_zero_row(gh, "tilde D1")?;
    let grid = *gh.grid();
    map_columns(gh, cfg, |mk, col, k| {
        let xi = grid.xi2(k);
        let mut inner = mk.antisymmetric(col, xi);
        scale_col(&mut inner, Complex64::new(-0.5, 0.0));
        Some(mk.d0(&inner, xi))
    })
}

/// Semi-spectral forcing components, transformed once.
struct ForcingHat {
    f21: SemiSpectralField,
    sym: SemiSpectralField,
    diff: SemiSpectralField,
}

impl ForcingHat {
    fn new(f: &TensorForcing) -> Result<Self> {
        let h11 = to_semispectral(&f.f11);
        let h12 = to_semispectral(&f.f12);
        let f21 = to_semispectral(&f.f21);
        let h22 = to_semispectral(&f.f22);
        Ok(Self {
            sym: h12.plus(&f21)?,
            diff: h11.minus(&h22)?,
            f21,
        })
    }
}

/// The linear solution `u = D[F]` in semi-spectral form.
///
/// Per mode, with `a = F21`, `s = F12 + F21`, `d = F11 - F22`:
/// `u1 = D0[i xi a + w3 K s + w2 K' d]`,
/// `u2 = D0[i xi d + w3 K d - w2 K' s] - D1[a]`,
/// where `K`, `K'` are the symmetric and sign-weighted exponential
/// convolutions and `w3`, `w2` the fused derivative weights.
pub fn assemble_d_hat(
    f: &TensorForcing,
    cfg: &OseenConfig,
) -> Result<(SemiSpectralField, SemiSpectralField)> {
    assemble_hat(f, cfg, true)
}

fn assemble_hat(
    f: &TensorForcing,
    cfg: &OseenConfig,
    check_boundary: bool,
) -> Result<(SemiSpectralField, SemiSpectralField)> {
    cfg.check()?;
    let grid = *f.grid();
    let fh = ForcingHat::new(f)?;
    if check_boundary {
        warn_boundary(&fh.sym, "D[F]");
        warn_boundary(&fh.diff, "D[F]");
    }
    let stencil = cfg.quadrature.stencil();
    let mk = ModeKernels {
        alpha: cfg.alpha,
        h: grid.h1(),
        stencil: &stencil,
    };
    let n1 = grid.n1();
    let zero = Complex64::new(0.0, 0.0);
    let mut u1 = SemiSpectralField::zeros(grid);
    let mut u2 = SemiSpectralField::zeros(grid);
    for k in 0..grid.n2() {
        if grid.is_nyquist2(k) {
            continue;
        }
        let xi = grid.xi2(k);
        let a = fh.f21.column(k);
        let s = fh.sym.column(k);
        let d = fh.diff.column(k);
        let d1a = mk.d1(&a, xi);
        if xi == 0.0 {
            u2.set_column(k, &d1a.iter().map(|v| -v).collect::<Vec<_>>());
            continue;
        }
        let ixi = Complex64::new(0.0, xi);
        let w3 = weight_d3(&grid, k);
        let w2 = weight_d2(&grid, k);
        let ks = mk.symmetric(&s, xi);
        let kd = mk.symmetric(&d, xi);
        let ks_anti = mk.antisymmetric(&s, xi);
        let kd_anti = mk.antisymmetric(&d, xi);
        let mut r1 = vec![zero; n1];
        let mut r2 = vec![zero; n1];
        for i in 0..n1 {
            r1[i] = ixi * a[i] + w3 * ks[i] + kd_anti[i] * w2;
            r2[i] = ixi * d[i] + w3 * kd[i] - ks_anti[i] * w2;
        }
        u1.set_column(k, &mk.d0(&r1, xi));
        let mut c2 = mk.d0(&r2, xi);
        add_col(&mut c2, &d1a, -1.0);
        u2.set_column(k, &c2);
    }
    Ok((u1, u2))
}

/// `D[F]` in physical space.
pub fn assemble_d(f: &TensorForcing, cfg: &OseenConfig) -> Result<VectorField> {
    let (u1, u2) = assemble_d_hat(f, cfg)?;
    VectorField::new(to_physical_unchecked(&u1), to_physical_unchecked(&u2))
}

/// [`assemble_d`] without the boundary warning, for Picard iterates whose
/// wake legitimately reaches the x1 edges.
pub(crate) fn assemble_d_quiet(f: &TensorForcing, cfg: &OseenConfig) -> Result<VectorField> {
    let (u1, u2) = assemble_hat(f, cfg, false)?;
    VectorField::new(to_physical_unchecked(&u1), to_physical_unchecked(&u2))
}

/// `D[F]` through the four separately exposed operators; slower than
/// [`assemble_d`] and kept as its cross-check.
pub fn assemble_d_unfused(f: &TensorForcing, cfg: &OseenConfig) -> Result<VectorField> {
    use crate::spectral::dx2_multiplier;
    check_same_grid(f.f11.grid(), f.f22.grid())?;
    let fh = ForcingHat::new(f)?;
    let u1 = apply_d0(&dx2_multiplier(&fh.f21, 1), cfg)?
        .plus(&apply_tilde_d0_d3(&fh.sym, cfg)?)?
        .plus(&apply_tilde_d1_d2(&fh.diff, cfg)?)?;
    let u2 = apply_d0(&dx2_multiplier(&fh.diff, 1), cfg)?
        .plus(&apply_tilde_d0_d3(&fh.diff, cfg)?)?
        .minus(&apply_d1(&fh.f21, cfg)?)?
        .minus(&apply_tilde_d1_d2(&fh.sym, cfg)?)?;
    let grid = *f.grid();
    let drop_nyquist = |u: SemiSpectralField| {
        u.map_modes(|k, _| Complex64::new(if grid.is_nyquist2(k) { 0.0 } else { 1.0 }, 0.0))
    };
    VectorField::new(
        to_physical_unchecked(&drop_nyquist(u1)),
        to_physical_unchecked(&drop_nyquist(u2)),
    )
}
