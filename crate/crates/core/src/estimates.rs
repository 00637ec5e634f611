//! Empirical constants for the band-localized multiplier bounds, the linear
//! and product estimates, and the constant `C0` used by the smallness gate.
//!
//! Every bound is evaluated with unit constant; a report records the
//! ratios `lhs / bound` and their supremum.

use log::debug;
use num_complex::Complex64;

use crate::besov::{
    data_norm_from_bands, lq_aggregate, solution_norm_from_bands, BandDecomposition, HybridContext,
    ThmParams,
};
use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};
use crate::field::{Components, ScalarField, TensorForcing, VectorField};
use crate::grid::Grid2;
use crate::littlewood_paley::{all_bands, band_project, is_high, pow2, BandRange, DyadicProfile};
use crate::norm::{check_exponent, mixed_norm};
use crate::oseen::{assemble_d, eigen_frequencies, OseenConfig, QuadratureRule};
use crate::spectral::{dealiased_product, to_physical_unchecked, to_semispectral};

/// Decay rate constant used in the comparison symbol of the `lambda_-`
/// semigroup. Within a band `|xi| >= 2^{j-1}` one only has
/// `|lambda_-(xi)| >= |lambda_-(2^j)| / 4`.
pub const C_LAMBDA_MINUS: f64 = 0.25;
/// Rate constant for the `lambda_+` and `|d2|` semigroups.
pub const C_DEFAULT: f64 = 0.5;
/// Safety factor applied to the measured sup in [`estimate_c0`].
pub const C0_SAFETY: f64 = 2.0;

/// Band norms below this fraction of the largest one are skipped as empty.
const EMPTY_BAND: f64 = 1e-12;

/// One measured ratio with the parameters it was taken at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub member: usize,
    pub alpha: f64,
    pub j: Option<i32>,
    pub t: Option<f64>,
    /// `+1` / `-1` for the `lambda_+` / `lambda_-` branch.
    pub branch: Option<i8>,
    pub ratio: f64,
}

impl Sample {
    fn new(member: usize, alpha: f64, ratio: f64) -> Self {
        Self { member, alpha, j: None, t: None, branch: None, ratio }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReport {
    pub id: String,
    pub sup: f64,
    pub samples: Vec<Sample>,
    pub grid: Grid2,
    pub profile: &'static str,
    /// Samples dropped because the bound side vanished.
    pub skipped: usize,
}

impl ConstantReport {
    fn new(id: &str, grid: Grid2, samples: Vec<Sample>, skipped: usize) -> Self {
        let sup = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        Self {
            id: id.to_string(),
            sup,
            samples,
            grid,
            profile: DyadicProfile.id(),
            skipped,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.sup.is_finite() && self.samples.iter().all(|s| s.ratio.is_finite())
    }

    /// `max(a/b, b/a)` of the two sups (1 when both vanish).
    pub fn spread_against(&self, other: &ConstantReport) -> f64 {
        refinement_factor(self.sup, other.sup)
    }
}

pub fn refinement_factor(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else if a == 0.0 || b == 0.0 {
        f64::INFINITY
    } else {
        (a / b).max(b / a)
    }
}

/// The four band-localized multiplier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMultiplier {
    /// `(alpha^2 - d2^2)^{-1/2}` against `(alpha^2 + 2^{2j})^{-1/2}`.
    Resolvent,
    /// `lambda_pm(D2)` against `|lambda_pm(2^j)|`.
    Lambda,
    /// `exp(-|lambda_pm(D2)| T)` against `exp(-c |lambda_pm(2^j)| T)`.
    Semigroup,
    /// `exp(-|d2| T)` against `exp(-c 2^j T)`.
    Poisson,
}

impl BandMultiplier {
    pub const ALL: [BandMultiplier; 4] = [Self::Resolvent, Self::Lambda, Self::Semigroup, Self::Poisson];

    pub fn id(&self) -> &'static str {
        match self {
            Self::Resolvent => "band-resolvent",
            Self::Lambda => "band-lambda",
            Self::Semigroup => "band-semigroup",
            Self::Poisson => "band-poisson",
        }
    }

    fn uses_t(&self) -> bool {
        matches!(self, Self::Semigroup | Self::Poisson)
    }

    fn branches(&self) -> &'static [i8] {
        match self {
            Self::Lambda | Self::Semigroup => &[1, -1],
            _ => &[0],
        }
    }

    /// Mode multiplier divided by the comparison bound at band `j`, so the
    /// exponentials never underflow separately.
    pub fn normalized_symbol(&self, alpha: f64, j: i32, t: f64, branch: i8, xi: f64) -> f64 {
        let xj = pow2(j);
        let lam = |x: f64| {
            let e = eigen_frequencies(alpha, x);
            if branch > 0 {
                e.lambda_plus
            } else {
                e.lambda_minus
            }
        };
        match self {
            Self::Resolvent => (alpha * alpha + xj * xj).sqrt() / (alpha * alpha + xi * xi).sqrt(),
            Self::Lambda => {
                let b = lam(xj).abs();
                if b == 0.0 {
                    0.0
                } else {
                    lam(xi) / b
                }
            }
            Self::Semigroup => {
                let c = if branch > 0 { C_DEFAULT } else { C_LAMBDA_MINUS };
                (-(lam(xi).abs() - c * lam(xj).abs()) * t).exp()
            }
            Self::Poisson => (-(xi.abs() - C_DEFAULT * xj) * t).exp(),
        }
    }
}

/// Ratios `|| Delta_j m(D2) f ||_p / (bound_j || Delta_j f ||_p)` for one
/// multiplier family over ensemble members, bands, `alphas` and `ts`.
pub fn verify_band_multiplier(
    kind: BandMultiplier,
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    ts: &[f64],
    p: f64,
) -> Result<ConstantReport> {
    ens.validate()?;
    check_exponent("p", p)?;
    for &a in alphas {
        HybridContext::new(a)?;
    }
    if ts.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("times T must be finite and nonnegative".into()));
    }
    let profile = DyadicProfile;
    let no_t = [0.0];
    let ts = if kind.uses_t() { ts } else { &no_t[..] };
    let mut samples = Vec::new();
    let mut skipped = 0;
    for member in 0..ens.count {
        let fh = to_semispectral(&ens.scalar(grid, member, 0));
        let bands = all_bands(&fh, &profile);
        let norms: Vec<f64> = bands
            .iter()
            .map(|(_, b)| mixed_norm(&to_physical_unchecked(b), p, p))
            .collect::<Result<_>>()?;
        let top = norms.iter().cloned().fold(0.0, f64::max);
        for ((j, band), norm) in bands.iter().zip(&norms) {
            if *norm <= EMPTY_BAND * top || *norm == 0.0 {
                skipped += 1;
                continue;
            }
            for &alpha in alphas {
                for &t in ts {
                    for &branch in kind.branches() {
                        let out = band.map_modes(|_, xi| {
                            if xi == 0.0 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new(kind.normalized_symbol(alpha, *j, t, branch, xi), 0.0)
                            }
                        });
                        let lhs = mixed_norm(&to_physical_unchecked(&out), p, p)?;
                        samples.push(Sample {
                            member,
                            alpha,
                            j: Some(*j),
                            t: kind.uses_t().then_some(t),
                            branch: (branch != 0).then_some(branch),
                            ratio: lhs / norm,
                        });
                    }
                }
            }
        }
    }
    let report = ConstantReport::new(kind.id(), *grid, samples, skipped);
    debug!("{}: sup {:e} over {} samples", report.id, report.sup, report.samples.len());
    Ok(report)
}

/// All four multiplier reports.
pub fn verify_band_multipliers(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    ts: &[f64],
    p: f64,
) -> Result<[ConstantReport; 4]> {
    let [a, b, c, d] = BandMultiplier::ALL;
    Ok([
        verify_band_multiplier(a, ens, grid, alphas, ts, p)?,
        verify_band_multiplier(b, ens, grid, alphas, ts, p)?,
        verify_band_multiplier(c, ens, grid, alphas, ts, p)?,
        verify_band_multiplier(d, ens, grid, alphas, ts, p)?,
    ])
}

/// The three-term right-hand side of the linear estimate with unit
/// constants, from band norms of `F` taken in `L^{p1}` replaced by `L^{p3}`.
pub fn linear_bound(bands: &[(i32, f64)], alpha: f64, tp: &ThmParams, p3: f64) -> f64 {
    let (r1, r2, r3) = (1.0 / tp.p1, 1.0 / tp.p2, 1.0 / p3);
    let (high, low): (Vec<_>, Vec<_>) = bands.iter().partition(|(j, _)| is_high(*j, alpha));
    alpha.powf(-r1) * lq_aggregate(&high, r1 + r2 + r3 - 2.0, tp.q)
        + alpha.powf(r1 - r3) * lq_aggregate(&low, -r1 + r2 + 2.0 * r3 - 2.0, tp.q)
        + alpha.powf(-1.0 + r3 - r1) * lq_aggregate(&low, r1 + r2 - 1.0, tp.q)
}

/// The single-space bound `alpha^{-1/p1} ||F||` in the Besov space with
/// regularity `3/p1 + 1/p2 - 2` and integrability `(p1/2, p2)`.
pub fn half_exponent_bound(bands: &[(i32, f64)], alpha: f64, tp: &ThmParams) -> f64 {
    alpha.powf(-1.0 / tp.p1) * lq_aggregate(bands, 3.0 / tp.p1 + 1.0 / tp.p2 - 2.0, tp.q)
}

fn check_p3(tp: &ThmParams, p3: f64) -> Result<()> {
    check_exponent("p3", p3)?;
    if p3 > tp.p1 {
        return Err(Error::InvalidParameter(format!("need p3 = {p3} <= p1 = {}", tp.p1)));
    }
    Ok(())
}

/// Ratios `||D[F]||_S / bound` for the linear estimate at exponent `p3`.
pub fn verify_linear_estimate(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
    p3: f64,
    quadrature: QuadratureRule,
) -> Result<ConstantReport> {
    check_p3(tp, p3)?;
    linear_report("linear", ens, grid, alphas, tp, quadrature, |bands, alpha| {
        Ok(BoundBands::Split(bands.norms(p3, tp.p2)?, alpha, p3))
    })
}

/// The same estimate with `p3 = p1 / 2` collapsed to one Besov norm.
pub fn verify_linear_half(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
    quadrature: QuadratureRule,
) -> Result<ConstantReport> {
    let p3 = tp.p1 / 2.0;
    if p3 < 1.0 {
        return Err(Error::InvalidParameter(format!("need p1 = {} >= 2", tp.p1)));
    }
    linear_report("linear-half", ens, grid, alphas, tp, quadrature, |bands, alpha| {
        Ok(BoundBands::Whole(bands.norms(p3, tp.p2)?, alpha))
    })
}

enum BoundBands {
    Split(Vec<(i32, f64)>, f64, f64),
    Whole(Vec<(i32, f64)>, f64),
}

fn linear_report(
    id: &str,
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
    quadrature: QuadratureRule,
    bound_bands: impl Fn(&BandDecomposition, f64) -> Result<BoundBands>,
) -> Result<ConstantReport> {
    ens.validate()?;
    let profile = DyadicProfile;
    let mut samples = Vec::new();
    let mut skipped = 0;
    for member in 0..ens.count {
        let f = ens.tensor(grid, member);
        let dec = BandDecomposition::new(&f, &profile);
        for &alpha in alphas {
            let ctx = HybridContext::new(alpha)?;
            let bound = match bound_bands(&dec, alpha)? {
                BoundBands::Split(b, a, p3) => linear_bound(&b, a, tp, p3),
                BoundBands::Whole(b, a) => half_exponent_bound(&b, a, tp),
            };
            if bound == 0.0 {
                skipped += 1;
                continue;
            }
            let u = assemble_d(&f, &OseenConfig::new(alpha, quadrature)?)?;
            let s = solution_norm_from_bands(&BandDecomposition::new(&u, &profile).norms(tp.p1, tp.p2)?, tp, &ctx);
            samples.push(Sample::new(member, alpha, s / bound));
        }
    }
    Ok(ConstantReport::new(id, *grid, samples, skipped))
}

/// Paraproduct pieces of `f g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bony {
    /// `sum_k S_{k-3} f Delta_k g`.
    pub t_fg: ScalarField,
    pub t_gf: ScalarField,
    /// `sum_{|k-l| <= 2} Delta_k f Delta_l g`.
    pub r: ScalarField,
}

impl Bony {
    pub fn sum(&self) -> Result<ScalarField> {
        self.t_fg.plus(&self.t_gf)?.plus(&self.r)
    }
}

fn physical_bands(f: &ScalarField) -> Vec<(i32, ScalarField)> {
    all_bands(&to_semispectral(f), &DyadicProfile)
        .into_iter()
        .map(|(j, b)| (j, to_physical_unchecked(&b)))
        .collect()
}

/// Splits the dealiased product `f g` over the resolved bands.
pub fn bony_decompose(f: &ScalarField, g: &ScalarField) -> Result<Bony> {
    let fb = physical_bands(f);
    let gb = physical_bands(g);
    let grid = *f.grid();
    let mut t_fg = ScalarField::zeros(grid);
    let mut t_gf = ScalarField::zeros(grid);
    let mut r = ScalarField::zeros(grid);
    for (jk, fk) in &fb {
        for (jl, gl) in &gb {
            if fk.is_zero() || gl.is_zero() {
                continue;
            }
            let prod = dealiased_product(fk, gl)?;
            let target = if jk - jl >= 3 {
                &mut t_gf
            } else if jl - jk >= 3 {
                &mut t_fg
            } else {
                &mut r
            };
            *target = target.plus(&prod)?;
        }
    }
    Ok(Bony { t_fg, t_gf, r })
}

/// `max |sum - f g| / max |f g|` for the dealiased product.
pub fn bony_reconstruction_error(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    let parts = bony_decompose(f, g)?;
    let fg = dealiased_product(f, g)?;
    let err = parts.sum()?.minus(&fg)?.max_abs();
    let scale = fg.max_abs();
    Ok(if scale == 0.0 { err } else { err / scale })
}

/// `alpha^{-1/p1} || f g ||` with regularity `3/p1 + 1/p2 - 2` and
/// integrability `(p1/2, p2)`.
pub fn product_lhs(f: &ScalarField, g: &ScalarField, alpha: f64, tp: &ThmParams) -> Result<f64> {
    let fg = dealiased_product(f, g)?;
    let bands = BandDecomposition::new(&fg, &DyadicProfile).norms(tp.p1 / 2.0, tp.p2)?;
    Ok(half_exponent_bound(&bands, alpha, tp))
}

fn product_samples(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
) -> Result<(Vec<Sample>, usize)> {
    ens.validate()?;
    if tp.p1 < 2.0 {
        return Err(Error::InvalidParameter(format!("need p1 = {} >= 2", tp.p1)));
    }
    let profile = DyadicProfile;
    let mut samples = Vec::new();
    let mut skipped = 0;
    for member in 0..ens.count {
        let f = ens.scalar(grid, member, 0);
        let g = ens.scalar(grid, member, 1);
        let fb = BandDecomposition::new(&f, &profile).norms(tp.p1, tp.p2)?;
        let gb = BandDecomposition::new(&g, &profile).norms(tp.p1, tp.p2)?;
        for &alpha in alphas {
            let ctx = HybridContext::new(alpha)?;
            let (sf, sg) = (solution_norm_from_bands(&fb, tp, &ctx), solution_norm_from_bands(&gb, tp, &ctx));
            for (a, b, na, nb) in [(&f, &g, sf, sg), (&f, &f, sf, sf)] {
                let den = na * nb;
                if den == 0.0 {
                    skipped += 1;
                    continue;
                }
                samples.push(Sample::new(member, alpha, product_lhs(a, b, alpha, tp)? / den));
            }
        }
    }
    Ok((samples, skipped))
}

/// Ratios of the product estimate; `tp` must lie in the admissible window.
pub fn verify_product_estimate(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
) -> Result<ConstantReport> {
    if let Some(msg) = tp.window_violation() {
        return Err(Error::OutsideWindow(msg));
    }
    let (samples, skipped) = product_samples(ens, grid, alphas, tp)?;
    Ok(ConstantReport::new("product", *grid, samples, skipped))
}

/// The same ratios for exponents outside the window, recorded for
/// comparison only.
pub fn product_archive(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
) -> Result<ConstantReport> {
    let (samples, skipped) = product_samples(ens, grid, alphas, tp)?;
    Ok(ConstantReport::new("product-archive", *grid, samples, skipped))
}

/// The gate constant and the two reports it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct C0Estimate {
    pub value: f64,
    pub safety: f64,
    pub linear: ConstantReport,
    pub bilinear: ConstantReport,
}

/// `C0 = 2 max(sup ||D[F]||_S / ||F||_D, sup ||D[u (x) v]||_S / (||u||_S ||v||_S))`.
///
/// Pairs are `(u_i, u_i)` and `(u_i, v_i)` with `v_i` built from the third
/// and fourth components of member `i`, so a larger ensemble is a superset.
pub fn estimate_c0(
    ens: &EnsembleSpec,
    grid: &Grid2,
    alphas: &[f64],
    tp: &ThmParams,
    quadrature: QuadratureRule,
) -> Result<C0Estimate> {
    ens.validate()?;
    if alphas.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let profile = DyadicProfile;
    let norms = |c: &dyn Components| BandDecomposition::new(c, &profile).norms(tp.p1, tp.p2);
    let mut lin = Vec::new();
    let mut bil = Vec::new();
    let mut skipped = (0, 0);
    for member in 0..ens.count {
        let f = ens.tensor(grid, member);
        let u = ens.vector(grid, member);
        let v = VectorField::new(ens.scalar(grid, member, 2), ens.scalar(grid, member, 3))?;
        let fb = norms(&f)?;
        let (ub, vb) = (norms(&u)?, norms(&v)?);
        let uu = TensorForcing::outer_with(&u, &u, dealiased_product)?;
        let uv = TensorForcing::outer_with(&u, &v, dealiased_product)?;
        for &alpha in alphas {
            let ctx = HybridContext::new(alpha)?;
            let cfg = OseenConfig::new(alpha, quadrature)?;
            let s = |w: &VectorField| -> Result<f64> { Ok(solution_norm_from_bands(&norms(w)?, tp, &ctx)) };
            let d = data_norm_from_bands(&fb, tp, &ctx);
            if d == 0.0 {
                skipped.0 += 1;
            } else {
                lin.push(Sample::new(member, alpha, s(&assemble_d(&f, &cfg)?)? / d));
            }
            let (nu, nv) = (
                solution_norm_from_bands(&ub, tp, &ctx),
                solution_norm_from_bands(&vb, tp, &ctx),
            );
            for (t, den) in [(&uu, nu * nu), (&uv, nu * nv)] {
                if den == 0.0 {
                    skipped.1 += 1;
                } else {
                    bil.push(Sample::new(member, alpha, s(&assemble_d(t, &cfg)?)? / den));
                }
            }
        }
    }
    let linear = ConstantReport::new("c0-linear", *grid, lin, skipped.0);
    let bilinear = ConstantReport::new("c0-bilinear", *grid, bil, skipped.1);
    let value = C0_SAFETY * linear.sup.max(bilinear.sup);
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidParameter(format!("degenerate C0 estimate {value}")));
    }
    Ok(C0Estimate { value, safety: C0_SAFETY, linear, bilinear })
}

/// Ratio of the band-resolvent multiplier on a single mode `xi` of band `j`.
pub fn single_mode_resolvent_ratio(alpha: f64, j: i32, xi: f64) -> f64 {
    BandMultiplier::Resolvent.normalized_symbol(alpha, j, 0.0, 0, xi)
}

/// `Delta_j` of `f` in physical space.
pub fn band_field(f: &ScalarField, j: i32) -> ScalarField {
    to_physical_unchecked(&band_project(&to_semispectral(f), j, &DyadicProfile).field)
}

/// Band range of `grid` (re-exported for callers building sweeps).
pub fn bands_of(grid: &Grid2) -> BandRange {
    BandRange::for_grid(grid)
}
