//! Reproducible random band-limited test fields.
//!
//! Each member is a sum of xi2 modes with complex Gaussian amplitudes and a
//! Gaussian x1 envelope per mode. The modes and random draws depend only on
//! `L2` and the band set, not on the sample counts, so refining a grid
//! samples the same function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SemiSpectralField, TensorForcing, VectorField};
use crate::grid::Grid2;
use crate::littlewood_paley::pow2;
use crate::spectral::to_physical_unchecked;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    /// Dyadic cells `[2^j / sqrt 2, 2^j sqrt 2)` for `j` in `jlo..=jhi`.
    pub jlo: i32,
    pub jhi: i32,
    /// Overall amplitude multiplier.
    pub amplitude: f64,
    /// x1 width of the Gaussian envelope.
    pub width: f64,
    /// Envelope centers are uniform in `[-spread, spread]`.
    pub spread: f64,
}

impl EnsembleSpec {
    pub fn new(seed: u64, count: usize, jlo: i32, jhi: i32) -> Self {
        Self {
            seed,
            count,
            jlo,
            jhi,
            amplitude: 1.0,
            width: 3.0,
            spread: 2.0,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if self.jlo > self.jhi {
            return Err(Error::InvalidParameter(format!(
                "band range {}..={} is empty",
                self.jlo, self.jhi
            )));
        }
        if !(self.width > 0.0 && self.spread >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("bad envelope or amplitude".into()));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Scalar member `index`, component `component`.
    pub fn scalar(&self, grid: &Grid2, index: usize, component: usize) -> ScalarField {
        let mut rng = self.rng((index as u64) << 8 | component as u64);
        band_field(grid, self.jlo, self.jhi, self.amplitude, self.width, self.spread, &mut rng)
    }

    pub fn vector(&self, grid: &Grid2, index: usize) -> VectorField {
        VectorField {
            u1: self.scalar(grid, index, 0),
            u2: self.scalar(grid, index, 1),
        }
    }

    pub fn tensor(&self, grid: &Grid2, index: usize) -> TensorForcing {
        TensorForcing {
            f11: self.scalar(grid, index, 0),
            f12: self.scalar(grid, index, 1),
            f21: self.scalar(grid, index, 2),
            f22: self.scalar(grid, index, 3),
        }
    }
}

/// Positive mode numbers `m` (with `xi = pi m / L2`) inside the band cells
/// and strictly below the Nyquist mode of `grid`.
pub fn band_modes(grid: &Grid2, jlo: i32, jhi: i32) -> Vec<usize> {
    let lo = pow2(jlo) / std::f64::consts::SQRT_2;
    let hi = pow2(jhi) * std::f64::consts::SQRT_2;
    (1..grid.n2() / 2)
        .filter(|&k| {
            let xi = grid.xi2(k);
            xi >= lo && xi < hi
        })
        .collect()
}

/// One random field with the ensemble law.
pub fn band_field(
    grid: &Grid2,
    jlo: i32,
    jhi: i32,
    amplitude: f64,
    width: f64,
    spread: f64,
    rng: &mut impl Rng,
) -> ScalarField {
    let mut fh = SemiSpectralField::zeros(*grid);
    let scale = 2.0 * grid.l2() * amplitude;
    for k in band_modes(grid, jlo, jhi) {
        let xi = grid.xi2(k);
        let sd = (0.5 / xi).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let a = Complex64::new(re, im) * (sd * scale);
        let center = spread * (2.0 * rng.random::<f64>() - 1.0);
        let m = grid.mirror2(k);
        for i in 0..grid.n1() {
            let t = (grid.x1(i) - center) / width;
            let v = a * (-t * t).exp();
            fh.set(i, k, v);
            fh.set(i, m, v.conj());
        }
    }
    to_physical_unchecked(&fh)
}
