use std::f64::consts::{PI, SQRT_2};

use oseen2d::besov::ThmParams;
use oseen2d::ensemble::EnsembleSpec;
use oseen2d::estimates::*;
use oseen2d::oseen::QuadratureRule;
use oseen2d::{Error, Grid2, ScalarField};
use proptest::prelude::*;

fn lab() -> Grid2 {
    Grid2::new(8.0 * PI, 64, 4.0 * PI, 128).unwrap()
}

fn tp() -> ThmParams {
    ThmParams::new(2.0, 2.0, 1.0).unwrap()
}

#[test]
fn single_mode_resolvent_ratio_at_band_center() {
    for alpha in [0.01, 1.0, 10.0] {
        for j in -2..5 {
            let x = 2f64.powi(j);
            assert!((single_mode_resolvent_ratio(alpha, j, x) - 1.0).abs() <= 1e-14);
            for xi in [x / SQRT_2, x * SQRT_2] {
                let r = single_mode_resolvent_ratio(alpha, j, xi);
                assert!((1.0 / SQRT_2 - 1e-14..=SQRT_2 + 1e-14).contains(&r));
            }
            for xi in [x / 2.0, 2.0 * x] {
                let r = single_mode_resolvent_ratio(alpha, j, xi);
                assert!(r > 0.5 && r < 2.0);
            }
        }
    }
}

#[test]
fn semigroups_at_zero_time_are_identity() {
    for kind in [BandMultiplier::Semigroup, BandMultiplier::Poisson] {
        for branch in [-1i8, 1] {
            assert_eq!(kind.normalized_symbol(1.0, 2, 0.0, branch, 3.0), 1.0);
        }
    }
    let ens = EnsembleSpec::new(4, 2, -1, 3);
    let r = verify_band_multiplier(BandMultiplier::Poisson, &ens, &lab(), &[1.0], &[0.0], 2.0).unwrap();
    assert!((r.sup - 1.0).abs() <= 1e-12, "{}", r.sup);
}

#[test]
fn band_multipliers_are_bounded() {
    let ens = EnsembleSpec::new(42, 3, -1, 3);
    let reports = verify_band_multipliers(&ens, &lab(), &[0.5, 2.0], &[0.0, 0.5, 8.0], 2.0).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["band-resolvent", "band-lambda", "band-semigroup", "band-poisson"]);
    for r in &reports {
        assert!(r.is_finite() && r.sup > 0.0 && r.sup <= 4.0, "{} {}", r.id, r.sup);
        assert_eq!(r.profile, "smooth-bump-v1");
    }
}

#[test]
fn invalid_multiplier_inputs() {
    let ens = EnsembleSpec::new(1, 1, 0, 1);
    let k = BandMultiplier::Semigroup;
    assert!(verify_band_multiplier(k, &ens, &lab(), &[1.0], &[-1.0], 2.0).is_err());
    assert!(verify_band_multiplier(k, &ens, &lab(), &[1.0], &[1.0], 0.5).is_err());
    assert!(matches!(
        verify_band_multiplier(k, &ens.with_count(0), &lab(), &[1.0], &[1.0], 2.0),
        Err(Error::EmptyEnsemble)
    ));
}

#[test]
fn zero_forcing_samples_are_skipped() {
    let ens = EnsembleSpec::new(1, 2, 0, 1).with_amplitude(0.0);
    let r = verify_linear_estimate(&ens, &lab(), &[1.0], &tp(), 1.0, QuadratureRule::Septic).unwrap();
    assert!(r.samples.is_empty());
    assert_eq!(r.skipped, 2);
}

#[test]
fn bony_pieces_land_where_expected() {
    let g = lab();
    let f = EnsembleSpec::new(1, 1, -1, -1).scalar(&g, 0, 0);
    let h = EnsembleSpec::new(2, 1, 4, 4).scalar(&g, 0, 0);
    let parts = bony_decompose(&f, &h).unwrap();
    let scale = parts.t_fg.max_abs();
    assert!(scale > 0.0);
    assert!(parts.t_gf.max_abs() <= 1e-14 * scale);
    assert!(parts.r.max_abs() <= 1e-14 * scale);

    let a = EnsembleSpec::new(3, 1, 2, 2).scalar(&g, 0, 0);
    let b = EnsembleSpec::new(4, 1, 2, 2).scalar(&g, 0, 0);
    let parts = bony_decompose(&a, &b).unwrap();
    let scale = parts.r.max_abs();
    assert!(scale > 0.0);
    assert!(parts.t_fg.max_abs() <= 1e-14 * scale && parts.t_gf.max_abs() <= 1e-14 * scale);
}

#[test]
fn bony_reconstructs_the_product() {
    let g = lab();
    for seed in 0..3 {
        let ens = EnsembleSpec::new(seed, 1, -1, 3);
        let err = bony_reconstruction_error(&ens.scalar(&g, 0, 0), &ens.scalar(&g, 0, 1)).unwrap();
        assert!(err <= 1e-8, "seed {seed}: {err:e}");
    }
    let z = ScalarField::zeros(g);
    assert_eq!(bony_reconstruction_error(&z, &z).unwrap(), 0.0);
}

#[test]
fn product_estimate_respects_window() {
    let ens = EnsembleSpec::new(42, 2, -1, 3);
    let outside = ThmParams::unchecked(4.0, 2.0, 1.0).unwrap();
    assert!(matches!(
        verify_product_estimate(&ens, &lab(), &[1.0], &outside),
        Err(Error::OutsideWindow(_))
    ));
    let archived = product_archive(&ens, &lab(), &[1.0], &outside).unwrap();
    assert_eq!(archived.id, "product-archive");
    assert!(archived.is_finite());
    let r = verify_product_estimate(&ens, &lab(), &[0.5, 2.0], &tp()).unwrap();
    assert_eq!(r.id, "product");
    assert_eq!(r.samples.len(), 2 * 2 * 2);
    assert!(r.is_finite() && r.sup > 0.0);
}

#[test]
fn c0_estimate_basics() {
    let ens = EnsembleSpec::new(42, 2, -1, 3);
    assert!(matches!(
        estimate_c0(&ens, &lab(), &[], &tp(), QuadratureRule::Septic),
        Err(Error::EmptyEnsemble)
    ));
    let small = estimate_c0(&ens, &lab(), &[1.0], &tp(), QuadratureRule::Septic).unwrap();
    let large = estimate_c0(&ens.with_count(4), &lab(), &[1.0], &tp(), QuadratureRule::Septic).unwrap();
    assert!(large.value >= small.value);
    assert_eq!(small.safety, C0_SAFETY);
    let expect = C0_SAFETY * small.linear.sup.max(small.bilinear.sup);
    assert_eq!(small.value, expect);
    assert_eq!(small.linear.id, "c0-linear");
    assert_eq!(small.bilinear.id, "c0-bilinear");
}

#[test]
fn linear_estimate_is_scale_invariant() {
    let g = Grid2::new(8.0 * PI, 128, 4.0 * PI, 64).unwrap();
    let half = Grid2::new(4.0 * PI, 128, 2.0 * PI, 64).unwrap();
    let mut ens = EnsembleSpec::new(8, 2, -1, 2);
    let mut shrunk = EnsembleSpec::new(8, 2, 0, 3);
    shrunk.width = ens.width / 2.0;
    shrunk.spread = ens.spread / 2.0;
    ens.amplitude = 1.0;
    for alpha in [0.5, 1.0, 3.0] {
        let a = verify_linear_estimate(&ens, &g, &[alpha], &tp(), 1.0, QuadratureRule::Septic).unwrap();
        let b = verify_linear_estimate(&shrunk, &half, &[2.0 * alpha], &tp(), 1.0, QuadratureRule::Septic).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.ratio - y.ratio).abs() <= 1e-10 * x.ratio, "alpha {alpha}: {} vs {}", x.ratio, y.ratio);
        }
    }
}

#[test]
fn single_high_band_uses_only_the_high_term() {
    let tp = tp();
    let (alpha, j, p3) = (1.0, 5, 1.0);
    let bound = linear_bound(&[(j, 1.0)], alpha, &tp, p3);
    let s = 1.0 / tp.p1 + 1.0 / tp.p2 + 1.0 / p3 - 2.0;
    let expect = alpha.powf(-1.0 / tp.p1) * (s * j as f64).exp2();
    assert!((bound - expect).abs() <= 1e-14 * expect);
    assert!(linear_bound(&[(-3, 1.0)], alpha, &tp, p3) > 0.0);
    assert_eq!(linear_bound(&[], alpha, &tp, p3), 0.0);
}

#[test]
fn linear_estimates_are_bounded() {
    let ens = EnsembleSpec::new(42, 2, -1, 3);
    let r = verify_linear_estimate(&ens, &lab(), &[0.5, 4.0], &tp(), 1.0, QuadratureRule::Septic).unwrap();
    assert!(r.is_finite() && r.sup > 0.0 && r.sup < 10.0);
    assert!(verify_linear_estimate(&ens, &lab(), &[1.0], &tp(), 3.0, QuadratureRule::Septic).is_err());
    let h = verify_linear_half(&ens, &lab(), &[1.0], &tp(), QuadratureRule::Septic).unwrap();
    assert_eq!(h.id, "linear-half");
    let low = ThmParams::unchecked(1.5, 2.0, 1.0).unwrap();
    assert!(verify_linear_half(&ens, &lab(), &[1.0], &low, QuadratureRule::Septic).is_err());
}

#[test]
fn refinement_factor_is_symmetric() {
    assert_eq!(refinement_factor(2.0, 1.0), 2.0);
    assert_eq!(refinement_factor(1.0, 2.0), 2.0);
    assert_eq!(refinement_factor(3.0, 3.0), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn product_lhs_is_bilinear(sa in 0u64..100, sb in 0u64..100, c in 0.1f64..4.0) {
        let g = Grid2::new(8.0 * PI, 32, 4.0 * PI, 64).unwrap();
        let f = EnsembleSpec::new(sa, 1, -1, 2).scalar(&g, 0, 0);
        let h = EnsembleSpec::new(sb, 1, -1, 2).scalar(&g, 0, 1);
        let base = product_lhs(&f, &h, 1.0, &tp()).unwrap();
        let scaled = product_lhs(&f.scaled(c), &h, 1.0, &tp()).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-12 * c * base);
        let swapped = product_lhs(&h, &f, 1.0, &tp()).unwrap();
        prop_assert!((swapped - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn band_fields_sum_to_mean_free_part(seed in 0u64..100) {
        let g = lab();
        let f = EnsembleSpec::new(seed, 1, -1, 3).scalar(&g, 0, 0);
        let r = bands_of(&g);
        let mut sum = ScalarField::zeros(g);
        for j in r.jmin..=r.jmax {
            sum = sum.plus(&band_field(&f, j)).unwrap();
        }
        prop_assert!(sum.minus(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
    }
}
