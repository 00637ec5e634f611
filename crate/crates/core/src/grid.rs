use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-l1, l1) x [-l2, l2)`.
///
/// Samples sit at `x = -l + i * h` with `h = 2l / n`, so `x = 0` is the grid
/// point `i = n / 2`. Mode indices follow the usual FFT ordering
/// `0, 1, .., n/2 - 1, -n/2, .., -1`; the mode at storage index `n / 2` is the
/// Nyquist mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    l1: f64,
    n1: usize,
    l2: f64,
    n2: usize,
}

impl Grid2 {
    pub fn new(l1: f64, n1: usize, l2: f64, n2: usize) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be a power of two >= 8"
                )));
            }
        }
        for (name, l) in [("l1", l1), ("l2", l2)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {l} must be positive and finite"
                )));
            }
        }
        Ok(Self { l1, n1, l2, n2 })
    }

    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn l2(&self) -> f64 {
        self.l2
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h1(&self) -> f64 {
        2.0 * self.l1 / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        2.0 * self.l2 / self.n2 as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        -self.l1 + i as f64 * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        -self.l2 + j as f64 * self.h2()
    }

    /// Signed mode number of storage index `k` along x2.
    pub fn mode2(&self, k: usize) -> i64 {
        signed_mode(k, self.n2)
    }

    /// Signed mode number of storage index `i` along x1.
    pub fn mode1(&self, i: usize) -> i64 {
        signed_mode(i, self.n1)
    }

    /// Angular frequency xi2 of storage index `k`.
    pub fn xi2(&self, k: usize) -> f64 {
        PI * self.mode2(k) as f64 / self.l2
    }

    /// Angular frequency xi1 of storage index `i` (full 2D transforms only).
    pub fn xi1(&self, i: usize) -> f64 {
        PI * self.mode1(i) as f64 / self.l1
    }

    pub fn is_nyquist2(&self, k: usize) -> bool {
        k == self.n2 / 2
    }

    pub fn is_nyquist1(&self, i: usize) -> bool {
        i == self.n1 / 2
    }

    /// Storage index of the mirrored mode `-k`.
    pub fn mirror2(&self, k: usize) -> usize {
        (self.n2 - k) % self.n2
    }

    /// Lowest nonzero |xi2| on the grid.
    pub fn xi2_min(&self) -> f64 {
        PI / self.l2
    }

    /// Largest |xi2| on the grid (the Nyquist mode).
    pub fn xi2_max(&self) -> f64 {
        PI * (self.n2 / 2) as f64 / self.l2
    }

    /// The xi2 frequencies in increasing order.
    pub fn xi2_sorted(&self) -> Vec<f64> {
        let half = self.n2 as i64 / 2;
        (-half..half)
            .map(|m| PI * m as f64 / self.l2)
            .collect()
    }

    /// Indices `i` with `|x1| <= l1 / 2`.
    pub fn interior1(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n1).filter(move |&i| self.x1(i).abs() <= 0.5 * self.l1)
    }

    /// Same sample count on the domain shrunk by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.l1 / lambda, self.n1, self.l2 / lambda, self.n2)
    }

    /// Same domain at twice the resolution in both directions.
    pub fn refined(&self) -> Self {
        Self {
            l1: self.l1,
            n1: 2 * self.n1,
            l2: self.l2,
            n2: 2 * self.n2,
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn describe(&self) -> String {
        format!("L1={} N1={} L2={} N2={}", self.l1, self.n1, self.l2, self.n2)
    }
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
