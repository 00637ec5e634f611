//! Mixed Lebesgue norms `L^{p1}_{x1} L^{p2}_{x2}` by the rectangle rule.

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Validates an integrability exponent in `[1, inf]`.
pub fn check_exponent(name: &'static str, p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Exponent { name, value: p });
    }
    Ok(())
}

/// Pairwise summation; the fixed tree keeps results independent of how the
/// caller chunks its work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Discrete `l^p` norm of `xs` with quadrature weight `h`, scaled by the
/// largest entry to avoid overflow at large `p`.
pub fn weighted_lp(xs: &[f64], p: f64, h: f64) -> f64 {
    let peak = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return peak;
    }
    let terms: Vec<f64> = if p == 1.0 {
        xs.iter().map(|v| v.abs() / peak).collect()
    } else if p == 2.0 {
        xs.iter().map(|v| (v / peak) * (v / peak)).collect()
    } else {
        xs.iter().map(|v| (v.abs() / peak).powf(p)).collect()
    };
    let s = pairwise_sum(&terms) * h;
    peak * if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

/// `|| || f(x1, .) ||_{L^{p2}} ||_{L^{p1}}` with rectangle-rule weights.
pub fn mixed_norm(f: &ScalarField, p1: f64, p2: f64) -> Result<f64> {
    check_exponent("p1", p1)?;
    check_exponent("p2", p2)?;
    let g = f.grid();
    let inner: Vec<f64> = (0..g.n1())
        .map(|i| weighted_lp(f.row(i), p2, g.h2()))
        .collect();
    Ok(weighted_lp(&inner, p1, g.h1()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2;

    #[test]
    fn constant_integrand() {
        let g = Grid2::new(2.0, 16, 3.0, 32).unwrap();
        let f = ScalarField::from_fn(g, |_, _| 1.5).unwrap();
        let n = mixed_norm(&f, 1.0, 1.0).unwrap();
        assert!((n - 1.5 * 4.0 * 6.0).abs() < 1e-12);
        let n = mixed_norm(&f, f64::INFINITY, 2.0).unwrap();
        assert!((n - 1.5 * 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_exponents() {
        let f = ScalarField::zeros(Grid2::new(1.0, 8, 1.0, 8).unwrap());
        assert!(mixed_norm(&f, 0.5, 2.0).is_err());
        assert!(mixed_norm(&f, 2.0, f64::NAN).is_err());
        assert_eq!(mixed_norm(&f, 2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
    }
}
