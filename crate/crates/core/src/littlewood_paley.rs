//! Dyadic partition of unity in xi2 and the band operators built on it.

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SemiSpectralField;
use crate::grid::Grid2;

/// Smooth transition profile `theta` (1 below 1, 0 above 2) and the bump
/// `phi0(xi) = theta(|xi|) - theta(2 |xi|)` it generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DyadicProfile;

impl DyadicProfile {
    /// Identifier recorded with every reported constant.
    pub const ID: &'static str = "smooth-bump-v1";

    pub fn id(&self) -> &'static str {
        Self::ID
    }

    /// `e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)})` on `(0, 1)`.
    fn step(s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else if t >= 2.0 {
            0.0
        } else {
            1.0 - Self::step(t - 1.0)
        }
    }

    pub fn phi0(&self, xi: f64) -> f64 {
        let a = xi.abs();
        self.theta(a) - self.theta(2.0 * a)
    }

    /// `phi_j(xi) = phi0(2^{-j} xi)`; the scaling is exact in binary.
    pub fn phi(&self, j: i32, xi: f64) -> f64 {
        self.phi0(xi * pow2(-j))
    }
}

pub fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

/// Dyadic indices whose bands meet the nonzero grid modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandRange {
    pub jmin: i32,
    pub jmax: i32,
}

impl BandRange {
    /// `jmin` is the largest `j` with `2^j <= xi_min`, `jmax` the smallest
    /// with `2^j >= xi_max`.
    pub fn for_grid(grid: &Grid2) -> Self {
        let lo = grid.xi2_min();
        let hi = grid.xi2_max();
        let mut jmin = lo.log2().floor() as i32;
        while pow2(jmin) > lo {
            jmin -= 1;
        }
        while pow2(jmin + 1) <= lo {
            jmin += 1;
        }
        let mut jmax = hi.log2().ceil() as i32;
        while pow2(jmax) < hi {
            jmax += 1;
        }
        while pow2(jmax - 1) >= hi {
            jmax -= 1;
        }
        Self { jmin, jmax }
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.jmin..=self.jmax).contains(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.jmin..=self.jmax
    }

    pub fn len(&self) -> usize {
        (self.jmax - self.jmin + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Output of [`band_project`]; `resolved` is false when `j` lies outside
/// the grid's band range and the field is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandProjection {
    pub j: i32,
    pub field: SemiSpectralField,
    pub resolved: bool,
}

/// `phi_j` sampled on the modes of `grid`, zero at `xi2 = 0`.
pub fn band_weights(grid: &Grid2, j: i32, profile: &DyadicProfile) -> Vec<f64> {
    (0..grid.n2())
        .map(|k| {
            let xi = grid.xi2(k);
            if xi == 0.0 {
                0.0
            } else {
                profile.phi(j, xi)
            }
        })
        .collect()
}

fn apply_weights(fh: &SemiSpectralField, w: &[f64]) -> SemiSpectralField {
    fh.map_modes(|k, _| Complex64::new(w[k], 0.0))
}

/// The band operator `Delta_j`.
pub fn band_project(fh: &SemiSpectralField, j: i32, profile: &DyadicProfile) -> BandProjection {
    let grid = fh.grid();
    if !BandRange::for_grid(grid).contains(j) {
        warn!("band {j} outside the resolved range of {}", grid.describe());
        return BandProjection {
            j,
            field: SemiSpectralField::zeros(*grid),
            resolved: false,
        };
    }
    BandProjection {
        j,
        field: apply_weights(fh, &band_weights(grid, j, profile)),
        resolved: true,
    }
}

/// All resolved bands of `fh`, lowest first.
pub fn all_bands(fh: &SemiSpectralField, profile: &DyadicProfile) -> Vec<(i32, SemiSpectralField)> {
    BandRange::for_grid(fh.grid())
        .iter()
        .map(|j| (j, apply_weights(fh, &band_weights(fh.grid(), j, profile))))
        .collect()
}

/// `|| Delta_j Delta_k f || / || f ||` in the coefficient l2 norm.
pub fn almost_orthogonality_check(
    fh: &SemiSpectralField,
    j: i32,
    k: i32,
    profile: &DyadicProfile,
) -> Result<f64> {
    if (j - k).abs() <= 1 {
        return Err(Error::AdjacentBands { j, k });
    }
    let total = fh.l2();
    if total == 0.0 {
        return Ok(0.0);
    }
    let grid = fh.grid();
    let wj = band_weights(grid, j, profile);
    let wk = band_weights(grid, k, profile);
    let both = fh.map_modes(|m, _| Complex64::new(wj[m] * wk[m], 0.0));
    Ok(both.l2() / total)
}

/// Bands split at the cutoff: `2^j > alpha` is high, `2^j <= alpha` is low.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSplit {
    pub high: Vec<(i32, SemiSpectralField)>,
    pub low: Vec<(i32, SemiSpectralField)>,
}

pub fn is_high(j: i32, alpha: f64) -> bool {
    pow2(j) > alpha
}

pub fn hybrid_split(fh: &SemiSpectralField, alpha: f64, profile: &DyadicProfile) -> Result<HybridSplit> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let (high, low) = all_bands(fh, profile)
        .into_iter()
        .partition(|(j, _)| is_high(*j, alpha));
    Ok(HybridSplit { high, low })
}

/// Drops the `xi2 = 0` mode, which no band sees.
pub fn remove_zero_mode(fh: &SemiSpectralField) -> SemiSpectralField {
    fh.map_modes(|k, _| Complex64::new(if k == 0 { 0.0 } else { 1.0 }, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn profile_shape() {
        let p = DyadicProfile;
        assert_eq!(p.theta(0.5), 1.0);
        assert_eq!(p.theta(2.5), 0.0);
        assert_eq!(p.phi0(1.0), 1.0);
        assert_eq!(p.phi0(4.0), 0.0);
        assert_eq!(p.phi0(0.5), 0.0);
        assert_eq!(p.phi0(2.0), 0.0);
        for i in 1..400 {
            let xi = i as f64 * 0.01;
            let v = p.phi0(xi);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn band_range_covers_grid() {
        let g = Grid2::new(1.0, 8, 4.0 * PI, 128).unwrap();
        let r = BandRange::for_grid(&g);
        assert_eq!((r.jmin, r.jmax), (-2, 4));
        assert!(pow2(r.jmin - 1) <= g.xi2_min());
        assert!(pow2(r.jmax + 1) >= g.xi2_max());
        let g = Grid2::new(1.0, 8, 3.0, 64).unwrap();
        let r = BandRange::for_grid(&g);
        assert!(pow2(r.jmin) <= g.xi2_min() && pow2(r.jmin + 1) > g.xi2_min());
        assert!(pow2(r.jmax) >= g.xi2_max() && pow2(r.jmax - 1) < g.xi2_max());
    }

    #[test]
    fn out_of_range_band_is_flagged() {
        let g = Grid2::new(1.0, 8, 4.0 * PI, 64).unwrap();
        let mut fh = SemiSpectralField::zeros(g);
        fh.set(0, 1, Complex64::new(1.0, 0.0));
        let b = band_project(&fh, 30, &DyadicProfile);
        assert!(!b.resolved);
        assert_eq!(b.field.max_abs(), 0.0);
    }

    #[test]
    fn adjacent_bands_rejected() {
        let g = Grid2::new(1.0, 8, 4.0 * PI, 64).unwrap();
        let fh = SemiSpectralField::zeros(g);
        assert!(matches!(
            almost_orthogonality_check(&fh, 2, 3, &DyadicProfile),
            Err(Error::AdjacentBands { j: 2, k: 3 })
        ));
    }

    #[test]
    fn cutoff_is_inclusive_on_low_side() {
        assert!(!is_high(1, 2.0));
        assert!(is_high(2, 2.0));
    }
}
