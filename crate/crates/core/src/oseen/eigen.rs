/// Roots `lambda_- <= 0 <= lambda_+` of `lambda^2 - alpha lambda - xi2^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
}

impl EigenPair {
    /// `sqrt(alpha^2 + 4 xi2^2) = lambda_+ - lambda_-`.
    pub fn gap(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }
}

/// `lambda_- = -2 xi^2 / (alpha + sqrt(alpha^2 + 4 xi^2))` avoids the
/// cancellation of the textbook formula when `xi << alpha`.
pub fn eigen_frequencies(alpha: f64, xi2: f64) -> EigenPair {
    let root = alpha.hypot(2.0 * xi2);
    let den = alpha + root;
    let lambda_minus = if den == 0.0 { 0.0 } else { -2.0 * xi2 * xi2 / den };
    EigenPair {
        lambda_minus,
        lambda_plus: alpha - lambda_minus,
    }
}

/// `sqrt(alpha^2 + 4 xi2^2)`.
pub fn discriminant_root(alpha: f64, xi2: f64) -> f64 {
    alpha.hypot(2.0 * xi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            eigen_frequencies(0.0, 1.0),
            EigenPair { lambda_minus: -1.0, lambda_plus: 1.0 }
        );
        assert_eq!(
            eigen_frequencies(3.0, 2.0),
            EigenPair { lambda_minus: -1.0, lambda_plus: 4.0 }
        );
        let e = eigen_frequencies(5.0, 0.0);
        assert_eq!((e.lambda_minus, e.lambda_plus), (0.0, 5.0));
        let e = eigen_frequencies(0.0, 0.0);
        assert_eq!((e.lambda_minus, e.lambda_plus), (0.0, 0.0));
    }

    #[test]
    fn small_xi_keeps_relative_accuracy() {
        let e = eigen_frequencies(1.0, 1e-9);
        assert!((e.lambda_minus + 1e-18).abs() < 1e-30);
    }
}
