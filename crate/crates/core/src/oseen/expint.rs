//! Exponential-integrator recursions for one-sided exponential convolutions
//! on a periodic x1 grid.
//!
//! Causal: `C(x) = int_{-inf}^x e^{r (x - y)} g(y) dy` with `r <= 0`.
//! Anticausal: `A(x) = int_x^inf e^{r (x - y)} g(y) dy` with `r >= 0`.
//!
//! Over each cell the data are replaced by the Lagrange interpolant through a
//! centered stencil and integrated exactly against the exponential, which
//! stays stable for any `r h`.

use num_complex::Complex64;

/// Interpolation order of the exponential integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum QuadratureRule {
    /// Piecewise-linear data, second order.
    Linear,
    Cubic,
    Quintic,
    /// Degree seven, eighth order.
    #[default]
    Septic,
}

impl QuadratureRule {
    pub const ALL: [QuadratureRule; 4] = [Self::Linear, Self::Cubic, Self::Quintic, Self::Septic];

    pub fn degree(&self) -> usize {
        match self {
            Self::Linear => 1,
            Self::Cubic => 3,
            Self::Quintic => 5,
            Self::Septic => 7,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Linear => "expint-linear",
            Self::Cubic => "expint-cubic",
            Self::Quintic => "expint-quintic",
            Self::Septic => "expint-septic",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.id() == id || r.id().trim_start_matches("expint-") == id)
    }

    /// Stencil offsets relative to the left end of a cell.
    pub fn offsets(&self) -> std::ops::RangeInclusive<i64> {
        let d = self.degree() as i64;
        -(d - 1) / 2..=(d + 1) / 2
    }

    pub fn stencil(&self) -> Stencil {
        Stencil::new(*self)
    }
}

/// Lagrange basis of a rule written as polynomials in `t = 1 - s`, where `s`
/// is the position inside the cell.
#[derive(Debug, Clone)]
pub struct Stencil {
    rule: QuadratureRule,
    offsets: Vec<i64>,
    /// `coeffs[m][k]`: coefficient of `t^k` in the basis polynomial of node `m`.
    coeffs: Vec<Vec<f64>>,
}

impl Stencil {
    pub fn new(rule: QuadratureRule) -> Self {
        let offsets: Vec<i64> = rule.offsets().collect();
        let coeffs = offsets
            .iter()
            .map(|&m| {
                // prod_{n != m} (s - n) / (m - n) with s = 1 - t
                let mut poly = vec![1.0];
                let mut denom = 1.0;
                for &n in offsets.iter().filter(|&&n| n != m) {
                    // factor (1 - n) - t
                    let c0 = (1 - n) as f64;
                    let mut next = vec![0.0; poly.len() + 1];
                    for (k, &a) in poly.iter().enumerate() {
                        next[k] += a * c0;
                        next[k + 1] -= a;
                    }
                    poly = next;
                    denom *= (m - n) as f64;
                }
                poly.iter().map(|a| a / denom).collect()
            })
            .collect();
        Self { rule, offsets, coeffs }
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    /// Weights `w_m` with `int_0^1 e^{z t} g(1 - t) dt ~ sum_m w_m g(m)`.
    pub fn weights(&self, z: f64) -> Vec<f64> {
        let j = moments(z, self.rule.degree());
        self.coeffs
            .iter()
            .map(|c| c.iter().zip(&j).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `J_k(z) = int_0^1 e^{z t} t^k dt` for `k = 0..=kmax` and `z <= 0`.
pub fn moments(z: f64, kmax: usize) -> Vec<f64> {
    let mut j = vec![0.0; kmax + 1];
    if z == 0.0 {
        for (k, v) in j.iter_mut().enumerate() {
            *v = 1.0 / (k + 1) as f64;
        }
        return j;
    }
    let ez = z.exp();
    if -z >= kmax as f64 {
        // upward recurrence J_k = (e^z - k J_{k-1}) / z loses nothing while k <= |z|
        j[0] = z.exp_m1() / z;
        for k in 1..=kmax {
            j[k] = (ez - k as f64 * j[k - 1]) / z;
        }
    } else {
        // J_k = e^z sum_m (-z)^m / ((k+1)(k+2)...(k+m+1)), all terms positive
        let x = -z;
        for (k, v) in j.iter_mut().enumerate() {
            let mut term = 1.0 / (k + 1) as f64;
            let mut sum = term;
            let mut m = 1;
            loop {
                term *= x / (k + m + 1) as f64;
                sum += term;
                if term <= 1e-18 * sum {
                    break;
                }
                m += 1;
            }
            *v = ez * sum;
        }
    }
    j
}

fn wrap(n: i64, len: usize) -> usize {
    n.rem_euclid(len as i64) as usize
}

/// Periodic solution of `C' = r C + g` (causal for `r <= 0`).
pub fn causal(g: &[Complex64], rate: f64, h: f64, stencil: &Stencil) -> Vec<Complex64> {
    let n = g.len();
    if rate == 0.0 {
        return zero_rate(g, h, stencil, true);
    }
    let z = rate * h;
    let e = z.exp();
    let w = stencil.weights(z);
    let offs = stencil.offsets();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (wm, &m) in w.iter().zip(offs) {
            acc += g[wrap(i as i64 + m, n)] * *wm;
        }
        c[i + 1] = c[i] * e + acc * h;
    }
    let c0 = c[n] / (1.0 - (z * n as f64).exp());
    (0..n).map(|i| c[i] + c0 * (z * i as f64).exp()).collect()
}

/// Periodic solution of `A' = r A - g` (anticausal for `r >= 0`).
pub fn anticausal(g: &[Complex64], rate: f64, h: f64, stencil: &Stencil) -> Vec<Complex64> {
    let n = g.len();
    if rate == 0.0 {
        return zero_rate(g, h, stencil, false);
    }
    let z = -rate * h;
    let e = z.exp();
    let w = stencil.weights(z);
    let offs = stencil.offsets();
    let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
    for i in (0..n).rev() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (wm, &m) in w.iter().zip(offs) {
            acc += g[wrap(i as i64 + 1 - m, n)] * *wm;
        }
        a[i] = a[i + 1] * e + acc * h;
    }
    let an = a[0] / (1.0 - (z * n as f64).exp());
    (0..n)
        .map(|i| a[i] + an * (z * (n - i) as f64).exp())
        .collect()
}

/// Rate zero: the running integral of the mean-free part of `g`, itself
/// normalized to zero mean (the periodic problem fixes it only up to a
/// constant).
fn zero_rate(g: &[Complex64], h: f64, stencil: &Stencil, forward: bool) -> Vec<Complex64> {
    let n = g.len();
    let mean = g.iter().sum::<Complex64>() / n as f64;
    let g0: Vec<Complex64> = g.iter().map(|v| v - mean).collect();
    let w = stencil.weights(0.0);
    let offs = stencil.offsets();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n - 1 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (wm, &m) in w.iter().zip(offs) {
            acc += g0[wrap(i as i64 + m, n)] * *wm;
        }
        c[i + 1] = c[i] + acc * h;
    }
    let sign = if forward { 1.0 } else { -1.0 };
    let cm = c.iter().sum::<Complex64>() / n as f64;
    c.iter().map(|v| (v - cm) * sign).collect()
}
