//! Forcing generators with the admissibility checks every run relies on.

use std::path::PathBuf;

use log::info;
use num_complex::Complex64;
use oseen2d::dump;
use oseen2d::ensemble::band_field;
use oseen2d::spectral::{to_physical, to_semispectral};
use oseen2d::{Grid2, ScalarField, TensorForcing};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ForcingKind, ForcingSpec};
use crate::error::CliError;

/// Largest admissible edge-to-peak ratio in x1.
pub const BOUNDARY_MASS: f64 = 1e-10;

pub const COMPONENTS: [&str; 4] = ["f11", "f12", "f21", "f22"];

#[derive(Debug, Clone)]
pub struct Generated {
    pub forcing: TensorForcing,
    /// Peak of the removed x2-mean relative to the peak of the raw forcing.
    pub discarded_mean: f64,
    pub boundary_ratio: f64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn unit(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn gaussian(spec: &ForcingSpec, grid: &Grid2) -> Result<TensorForcing, CliError> {
    let mut r = rng(spec.seed, 0);
    let [c1, c2] = spec.center;
    let w2 = spec.width * spec.width;
    let comps: Vec<ScalarField> = COMPONENTS
        .iter()
        .map(|_| {
            let a = spec.amplitude * (2.0 * unit(&mut r) - 1.0);
            ScalarField::from_fn(*grid, |x1, x2| {
                a * (-((x1 - c1).powi(2) + (x2 - c2).powi(2)) / w2).exp()
            })
        })
        .collect::<oseen2d::Result<_>>()?;
    let [f11, f12, f21, f22]: [ScalarField; 4] = comps.try_into().expect("four components");
    Ok(TensorForcing::new(f11, f12, f21, f22)?)
}

fn random_band(spec: &ForcingSpec, grid: &Grid2) -> Result<TensorForcing, CliError> {
    let comps: Vec<ScalarField> = (0..4u64)
        .map(|c| {
            let mut r = rng(spec.seed, c);
            let mut sum = ScalarField::zeros(*grid);
            for &j in &spec.bands {
                let f = band_field(grid, j, j, spec.amplitude, spec.envelope, spec.spread, &mut r);
                sum = sum.plus(&f)?;
            }
            Ok(sum)
        })
        .collect::<oseen2d::Result<_>>()?;
    let [f11, f12, f21, f22]: [ScalarField; 4] = comps.try_into().expect("four components");
    Ok(TensorForcing::new(f11, f12, f21, f22)?)
}

/// Stem of component `name` for the prefix `path`.
pub fn component_stem(path: &str, name: &str) -> PathBuf {
    PathBuf::from(format!("{path}_{name}"))
}

fn from_file(spec: &ForcingSpec, grid: &Grid2) -> Result<TensorForcing, CliError> {
    let path = spec.path.as_deref().ok_or_else(|| CliError::Config("from-file needs a path".into()))?;
    let mut comps = Vec::with_capacity(4);
    for name in COMPONENTS {
        let stem = component_stem(path, name);
        let (hdr, f) = dump::read_scalar(&stem)
            .map_err(|e| CliError::Config(format!("{}: {e}", stem.display())))?;
        if hdr.grid.n1() != grid.n1() || hdr.grid.n2() != grid.n2() {
            return Err(CliError::Config(format!(
                "{}: shape mismatch, expected {}x{}, found {}x{}",
                stem.display(),
                grid.n1(),
                grid.n2(),
                hdr.grid.n1(),
                hdr.grid.n2()
            )));
        }
        if hdr.grid != *grid {
            return Err(CliError::Config(format!(
                "{}: domain mismatch, expected {}, found {}",
                stem.display(),
                grid.describe(),
                hdr.grid.describe()
            )));
        }
        comps.push(f);
    }
    let [f11, f12, f21, f22]: [ScalarField; 4] = comps.try_into().expect("four components");
    Ok(TensorForcing::new(f11, f12, f21, f22)?)
}

fn remove_mean(f: &ScalarField) -> Result<(ScalarField, f64), CliError> {
    let mut fh = to_semispectral(f);
    let mut mean = 0.0f64;
    for i in 0..f.grid().n1() {
        mean = mean.max(fh.get(i, 0).norm());
        fh.set(i, 0, Complex64::new(0.0, 0.0));
    }
    // column 0 holds h2 times the sum, i.e. 2 L2 times the mean
    Ok((to_physical(&fh)?, mean / (2.0 * f.grid().l2())))
}

/// Builds the forcing, projects out its x2-mean and checks the x1 decay.
pub fn generate_forcing(spec: &ForcingSpec, grid: &Grid2) -> Result<Generated, CliError> {
    let raw = match spec.kind {
        ForcingKind::GaussianTensor => gaussian(spec, grid)?,
        ForcingKind::RandomBand => random_band(spec, grid)?,
        ForcingKind::FromFile => from_file(spec, grid)?,
    };
    let peak = raw.max_abs();
    let mut means = 0.0f64;
    let mut out = Vec::with_capacity(4);
    for c in raw.components() {
        let (f, m) = remove_mean(c)?;
        means = means.max(m);
        out.push(f);
    }
    let [f11, f12, f21, f22]: [ScalarField; 4] = out.try_into().expect("four components");
    let forcing = TensorForcing::new(f11, f12, f21, f22)?;
    let discarded_mean = if peak == 0.0 { 0.0 } else { means / peak };
    let boundary_ratio = forcing.x1_boundary_ratio();
    info!("forcing: discarded x2-mean {discarded_mean:e} of peak, x1 edge ratio {boundary_ratio:e}");
    if boundary_ratio > BOUNDARY_MASS {
        return Err(CliError::Admissibility(format!(
            "forcing x1 boundary mass {boundary_ratio:e} of peak exceeds {BOUNDARY_MASS:e}"
        )));
    }
    Ok(Generated { forcing, discarded_mean, boundary_ratio })
}
