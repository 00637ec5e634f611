use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Real samples on a [`Grid2`], row-major with x1 outer and x2 inner.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Length {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index,
                context: "scalar field",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at every grid point.
    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1() {
            let x1 = grid.x1(i);
            for j in 0..grid.n2() {
                values.push(f(x1, grid.x2(j)));
            }
        }
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: Grid2, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n2 = self.grid.n2();
        &self.values[i * n2..(i + 1) * n2]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        ))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    /// Pointwise product on the grid, without dealiasing.
    pub fn times(&self, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        ))
    }

    /// Largest |f| on the two x1 edge rows divided by the peak |f|.
    pub fn x1_boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let last = self.grid.n1() - 1;
        let edge = self
            .row(0)
            .iter()
            .chain(self.row(last))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        edge / peak
    }

    /// Largest |f| on the two x2 edge columns divided by the peak |f|.
    pub fn x2_boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let last = self.grid.n2() - 1;
        let edge = (0..self.grid.n1())
            .flat_map(|i| [self.get(i, 0), self.get(i, last)])
            .fold(0.0f64, |m, v| m.max(v.abs()));
        edge / peak
    }
}

/// Complex samples indexed by (x1 sample, xi2 mode), mode index in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiSpectralField {
    grid: Grid2,
    values: Vec<Complex64>,
}

impl SemiSpectralField {
    pub fn new(grid: Grid2, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Length {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite {
                index,
                context: "semi-spectral field",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid2, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn set(&mut self, i: usize, k: usize, v: Complex64) {
        let idx = self.grid.index(i, k);
        self.values[idx] = v;
    }

    /// The x1 profile of mode `k`.
    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.grid.n1()).map(|i| self.get(i, k)).collect()
    }

    pub fn set_column(&mut self, k: usize, col: &[Complex64]) {
        debug_assert_eq!(col.len(), self.grid.n1());
        for (i, v) in col.iter().enumerate() {
            self.set(i, k, *v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Euclidean norm of all coefficients.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Multiplies mode `k` by `m(k, xi2)`.
    pub fn map_modes(&self, m: impl Fn(usize, f64) -> Complex64) -> Self {
        let n2 = self.grid.n2();
        let mult: Vec<Complex64> = (0..n2).map(|k| m(k, self.grid.xi2(k))).collect();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, v)| v * mult[idx % n2])
            .collect();
        Self::from_raw(self.grid, values)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * c)
                .collect(),
        ))
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, 1.0)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }
}

/// Velocity-like pair `(u1, u2)` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VectorField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        check_same_grid(u1.grid(), u2.grid())?;
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid2 {
        self.u1.grid()
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.u1, &self.u2]
    }

    pub fn max_abs(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    pub fn is_zero(&self) -> bool {
        self.u1.is_zero() && self.u2.is_zero()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u1: self.u1.scaled(c),
            u2: self.u2.scaled(c),
        }
    }

    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        Ok(Self {
            u1: self.u1.add_scaled(&other.u1, c)?,
            u2: self.u2.add_scaled(&other.u2, c)?,
        })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }
}

/// The 2x2 forcing tensor `F = {F_jk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorForcing {
    pub f11: ScalarField,
    pub f12: ScalarField,
    pub f21: ScalarField,
    pub f22: ScalarField,
}

impl TensorForcing {
    pub fn new(
        f11: ScalarField,
        f12: ScalarField,
        f21: ScalarField,
        f22: ScalarField,
    ) -> Result<Self> {
        for f in [&f12, &f21, &f22] {
            check_same_grid(f11.grid(), f.grid())?;
        }
        Ok(Self { f11, f12, f21, f22 })
    }

    pub fn zeros(grid: Grid2) -> Self {
        let z = ScalarField::zeros(grid);
        Self {
            f11: z.clone(),
            f12: z.clone(),
            f21: z.clone(),
            f22: z,
        }
    }

    /// The tensor `u (x) v`, i.e. `F_jk = u_j v_k`, formed with `product`.
    pub fn outer_with(
        u: &VectorField,
        v: &VectorField,
        product: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    ) -> Result<Self> {
        Self::new(
            product(&u.u1, &v.u1)?,
            product(&u.u1, &v.u2)?,
            product(&u.u2, &v.u1)?,
            product(&u.u2, &v.u2)?,
        )
    }

    pub fn grid(&self) -> &Grid2 {
        self.f11.grid()
    }

    pub fn components(&self) -> [&ScalarField; 4] {
        [&self.f11, &self.f12, &self.f21, &self.f22]
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .fold(0.0, |m, f| m.max(f.max_abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|f| f.is_zero())
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> Result<ScalarField>) -> Result<Self> {
        Self::new(f(&self.f11)?, f(&self.f12)?, f(&self.f21)?, f(&self.f22)?)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f11: self.f11.scaled(c),
            f12: self.f12.scaled(c),
            f21: self.f21.scaled(c),
            f22: self.f22.scaled(c),
        }
    }

    pub fn add_scaled(&self, other: &Self, c: f64) -> Result<Self> {
        Self::new(
            self.f11.add_scaled(&other.f11, c)?,
            self.f12.add_scaled(&other.f12, c)?,
            self.f21.add_scaled(&other.f21, c)?,
            self.f22.add_scaled(&other.f22, c)?,
        )
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }

    pub fn x1_boundary_ratio(&self) -> f64 {
        self.components()
            .iter()
            .fold(0.0, |m, f| m.max(f.x1_boundary_ratio()))
    }
}

/// Anything whose Besov-type norms are taken component-wise.
pub trait Components {
    fn component_list(&self) -> Vec<&ScalarField>;
}

impl Components for ScalarField {
    fn component_list(&self) -> Vec<&ScalarField> {
        vec![self]
    }
}

impl Components for VectorField {
    fn component_list(&self) -> Vec<&ScalarField> {
        self.components().to_vec()
    }
}

impl Components for TensorForcing {
    fn component_list(&self) -> Vec<&ScalarField> {
        self.components().to_vec()
    }
}

pub(crate) fn check_same_grid(a: &Grid2, b: &Grid2) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "{} vs {}",
            a.describe(),
            b.describe()
        )));
    }
    Ok(())
}
