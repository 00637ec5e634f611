//! Anisotropic Besov norms in x2, their hybrid high/low splits, and the
//! composite data (D) and solution (S) norms.

use crate::error::{Error, Result};
use crate::field::{Components, ScalarField, TensorForcing, VectorField};
use crate::grid::Grid2;
use crate::littlewood_paley::{all_bands, is_high, pow2, BandRange, DyadicProfile};
use crate::norm::{check_exponent, mixed_norm, weighted_lp};
use crate::spectral::{to_physical_unchecked, to_semispectral};

/// Regularity `s`, integrability `(p1, p2)` and summability `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, p1: f64, p2: f64, q: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("regularity s = {s} must be finite")));
        }
        check_exponent("p1", p1)?;
        check_exponent("p2", p2)?;
        check_exponent("q", q)?;
        Ok(Self { s, p1, p2, q })
    }
}

/// The uniform-flow speed `alpha` that sets the high/low cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridContext {
    pub alpha: f64,
}

impl HybridContext {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
        }
        Ok(Self { alpha })
    }
}

/// Exponents `(p1, p2, q)` of the well-posedness window
/// `max{1/3, 2/3 (1 - 1/p2)} < 1/p1 <= 1/2`, `1 <= p2 < 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThmParams {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl ThmParams {
    pub fn new(p1: f64, p2: f64, q: f64) -> Result<Self> {
        let tp = Self::unchecked(p1, p2, q)?;
        tp.window_violation().map_or(Ok(tp), |msg| Err(Error::OutsideWindow(msg)))
    }

    /// Accepts any valid exponents, for comparison runs outside the window.
    pub fn unchecked(p1: f64, p2: f64, q: f64) -> Result<Self> {
        check_exponent("p1", p1)?;
        check_exponent("p2", p2)?;
        check_exponent("q", q)?;
        Ok(Self { p1, p2, q })
    }

    pub fn window_violation(&self) -> Option<String> {
        let r1 = 1.0 / self.p1;
        let r2 = 1.0 / self.p2;
        let lower = (1.0f64 / 3.0).max(2.0 / 3.0 * (1.0 - r2));
        if !(r1 > lower && r1 <= 0.5) {
            return Some(format!(
                "need max(1/3, 2/3 (1 - 1/p2)) = {lower} < 1/p1 = {r1} <= 1/2"
            ));
        }
        if !(self.p2 < 4.0) {
            return Some(format!("need 1 <= p2 = {} < 4", self.p2));
        }
        None
    }

    pub fn in_window(&self) -> bool {
        self.window_violation().is_none()
    }

    /// High-band regularity of the data space.
    pub fn s_data_high(&self) -> f64 {
        2.0 / self.p1 + 1.0 / self.p2 - 2.0
    }

    pub fn s_data_low(&self) -> f64 {
        1.0 / self.p1 + 1.0 / self.p2 - 2.0
    }

    pub fn s_sol_high(&self) -> f64 {
        self.s_data_high() + 1.0
    }

    pub fn s_sol_low(&self) -> f64 {
        self.s_data_low() + 1.0
    }
}

/// Physical band fields `Delta_j f` of every component, computed once and
/// reusable for several exponent choices.
#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub grid: Grid2,
    pub range: BandRange,
    /// `bands[b][c]` is component `c` in band `range.jmin + b`.
    pub bands: Vec<Vec<ScalarField>>,
}

impl BandDecomposition {
    pub fn new<C: Components + ?Sized>(f: &C, profile: &DyadicProfile) -> Self {
        let comps = f.component_list();
        let grid = *comps[0].grid();
        let range = BandRange::for_grid(&grid);
        let mut bands = vec![Vec::with_capacity(comps.len()); range.len()];
        for c in comps {
            let fh = to_semispectral(c);
            for (b, (_, band)) in all_bands(&fh, profile).into_iter().enumerate() {
                bands[b].push(to_physical_unchecked(&band));
            }
        }
        Self { grid, range, bands }
    }

    /// `(j, max_c || Delta_j f_c ||_{L^p1 L^p2})` for every resolved band.
    pub fn norms(&self, p1: f64, p2: f64) -> Result<Vec<(i32, f64)>> {
        let mut out = Vec::with_capacity(self.bands.len());
        for (j, comps) in self.range.iter().zip(&self.bands) {
            let mut v = 0.0f64;
            for c in comps {
                v = v.max(mixed_norm(c, p1, p2)?);
            }
            out.push((j, v));
        }
        Ok(out)
    }
}

/// `l^q` norm of `2^{s j} b_j` over the given bands.
pub fn lq_aggregate(bands: &[(i32, f64)], s: f64, q: f64) -> f64 {
    let weighted: Vec<f64> = bands.iter().map(|&(j, b)| weight(s, j) * b).collect();
    weighted_lp(&weighted, q, 1.0)
}

/// `2^{s j}`, exact when `s j` is an integer.
pub fn weight(s: f64, j: i32) -> f64 {
    (s * j as f64).exp2()
}

fn split(bands: &[(i32, f64)], alpha: f64) -> (Vec<(i32, f64)>, Vec<(i32, f64)>) {
    bands.iter().partition(|(j, _)| is_high(*j, alpha))
}

pub fn besov_norm<C: Components + ?Sized>(
    f: &C,
    params: &BesovParams,
    profile: &DyadicProfile,
) -> Result<f64> {
    let bands = BandDecomposition::new(f, profile).norms(params.p1, params.p2)?;
    Ok(lq_aggregate(&bands, params.s, params.q))
}

/// `(||f||^{h;alpha}, ||f||^{l;alpha})` at a common regularity.
pub fn hybrid_norms<C: Components + ?Sized>(
    f: &C,
    params: &BesovParams,
    ctx: &HybridContext,
    profile: &DyadicProfile,
) -> Result<(f64, f64)> {
    let bands = BandDecomposition::new(f, profile).norms(params.p1, params.p2)?;
    let (high, low) = split(&bands, ctx.alpha);
    Ok((
        lq_aggregate(&high, params.s, params.q),
        lq_aggregate(&low, params.s, params.q),
    ))
}

/// `alpha^{-1/p1} ||b||^{h}_{s_high} + ||b||^{l}_{s_low}` from band values.
pub fn composite_from_bands(
    bands: &[(i32, f64)],
    alpha: f64,
    p1: f64,
    s_high: f64,
    s_low: f64,
    q: f64,
) -> f64 {
    let (high, low) = split(bands, alpha);
    alpha.powf(-1.0 / p1) * lq_aggregate(&high, s_high, q) + lq_aggregate(&low, s_low, q)
}

pub fn data_norm_from_bands(bands: &[(i32, f64)], tp: &ThmParams, ctx: &HybridContext) -> f64 {
    composite_from_bands(bands, ctx.alpha, tp.p1, tp.s_data_high(), tp.s_data_low(), tp.q)
}

pub fn solution_norm_from_bands(bands: &[(i32, f64)], tp: &ThmParams, ctx: &HybridContext) -> f64 {
    composite_from_bands(bands, ctx.alpha, tp.p1, tp.s_sol_high(), tp.s_sol_low(), tp.q)
}

/// The data-space norm `||F||_D`.
pub fn data_norm_d(
    f: &TensorForcing,
    tp: &ThmParams,
    ctx: &HybridContext,
    profile: &DyadicProfile,
) -> Result<f64> {
    let bands = BandDecomposition::new(f, profile).norms(tp.p1, tp.p2)?;
    Ok(data_norm_from_bands(&bands, tp, ctx))
}

/// The solution-space norm `||u||_S`.
pub fn solution_norm_s<C: Components + ?Sized>(
    u: &C,
    tp: &ThmParams,
    ctx: &HybridContext,
    profile: &DyadicProfile,
) -> Result<f64> {
    let bands = BandDecomposition::new(u, profile).norms(tp.p1, tp.p2)?;
    Ok(solution_norm_from_bands(&bands, tp, ctx))
}

/// Fraction of coefficient energy no band sees (the `xi2 = 0` mode).
pub fn unresolved_fraction<C: Components + ?Sized>(f: &C) -> f64 {
    let mut total = 0.0;
    let mut zero = 0.0;
    for c in f.component_list() {
        let fh = to_semispectral(c);
        for i in 0..fh.grid().n1() {
            for k in 0..fh.grid().n2() {
                let e = fh.get(i, k).norm_sqr();
                total += e;
                if k == 0 {
                    zero += e;
                }
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (zero / total).sqrt()
    }
}

/// `m` with `lambda = 2^m`, or an error.
pub fn dyadic_exponent(lambda: f64) -> Result<i32> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonDyadic(lambda));
    }
    let m = lambda.log2().round() as i32;
    if pow2(m) != lambda {
        return Err(Error::NonDyadic(lambda));
    }
    Ok(m)
}

/// `x -> lambda^degree f(lambda x)` on the grid shrunk by `lambda`.
///
/// The sample values are relabeled, not interpolated, so the map is exact.
pub fn dyadic_rescale(f: &ScalarField, lambda: f64, degree: i32) -> Result<ScalarField> {
    dyadic_exponent(lambda)?;
    let grid = f.grid().rescaled(lambda)?;
    let amp = lambda.powi(degree);
    ScalarField::new(grid, f.values().iter().map(|v| amp * v).collect())
}

pub fn rescale_vector(u: &VectorField, lambda: f64) -> Result<VectorField> {
    VectorField::new(dyadic_rescale(&u.u1, lambda, 1)?, dyadic_rescale(&u.u2, lambda, 1)?)
}

pub fn rescale_tensor(f: &TensorForcing, lambda: f64) -> Result<TensorForcing> {
    f.map(|c| dyadic_rescale(c, lambda, 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_examples() {
        assert!(ThmParams::new(2.0, 2.0, 1.0).is_ok());
        assert!(ThmParams::new(2.5, 1.5, 2.0).is_ok());
        assert!(ThmParams::new(3.0, 2.0, 1.0).is_err());
        assert!(ThmParams::new(1.5, 2.0, 1.0).is_err());
        assert!(ThmParams::new(2.0, 4.0, 1.0).is_err());
        assert!(ThmParams::new(2.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn dyadic_factors() {
        assert_eq!(dyadic_exponent(0.25).unwrap(), -2);
        assert_eq!(dyadic_exponent(8.0).unwrap(), 3);
        assert!(dyadic_exponent(3.0).is_err());
        assert!(dyadic_exponent(-2.0).is_err());
    }

    #[test]
    fn aggregate_single_band() {
        let v = lq_aggregate(&[(3, 2.0)], 0.5, 2.0);
        assert!((v - 2.0 * 2f64.powf(1.5)).abs() < 1e-14);
        assert_eq!(lq_aggregate(&[], 1.0, 1.0), 0.0);
    }
}
