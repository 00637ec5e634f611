use std::f64::consts::PI;

use num_complex::Complex64;
use oseen2d::besov::*;
use oseen2d::ensemble::EnsembleSpec;
use oseen2d::littlewood_paley::*;
use oseen2d::norm::mixed_norm;
use oseen2d::spectral::{to_physical, to_semispectral};
use oseen2d::{Error, Grid2, ScalarField, SemiSpectralField, TensorForcing};
use proptest::prelude::*;

fn lab() -> Grid2 {
    Grid2::new(8.0 * PI, 64, 4.0 * PI, 128).unwrap()
}

/// `cos(xi x2)` times a Gaussian in x1, with `xi` a grid mode.
fn single_mode(g: Grid2, xi: f64) -> ScalarField {
    ScalarField::from_fn(g, |x1, x2| (-(x1 * x1) / 9.0).exp() * (xi * x2).cos()).unwrap()
}

fn random(seed: u64) -> ScalarField {
    EnsembleSpec::new(seed, 1, -1, 3).scalar(&lab(), 0, 0)
}

#[test]
fn profile_support_and_range() {
    let p = DyadicProfile;
    assert_eq!(p.phi0(1.0), 1.0);
    assert_eq!(p.phi0(0.5), 0.0);
    assert_eq!(p.phi0(2.0), 0.0);
    for i in 0..=4000 {
        let xi = 0.01 + i as f64 * 0.001;
        let v = p.phi0(xi);
        assert!((0.0..=1.0).contains(&v));
        if !(0.5..=2.0).contains(&xi) {
            assert_eq!(v, 0.0);
        }
    }
    assert_eq!(BandRange::for_grid(&lab()), BandRange { jmin: -2, jmax: 4 });
}

#[test]
fn partition_of_unity_on_grid_modes() {
    let g = lab();
    let range = BandRange::for_grid(&g);
    for k in 1..g.n2() {
        let xi = g.xi2(k);
        let s: f64 = range.iter().map(|j| DyadicProfile.phi(j, xi)).sum();
        assert!((s - 1.0).abs() <= 1e-12, "mode {k}: {s}");
    }
}

#[test]
fn band_center_and_far_mode() {
    let g = lab();
    let j = 1;
    let f = to_semispectral(&single_mode(g, pow2(j)));
    let out = band_project(&f, j, &DyadicProfile);
    assert!(out.resolved);
    assert!(out.field.minus(&f).unwrap().max_abs() <= 1e-15 * f.max_abs());
    let far = to_semispectral(&single_mode(g, pow2(j + 2)));
    assert!(band_project(&far, j, &DyadicProfile).field.max_abs() <= 1e-14 * far.max_abs());
    let outside = band_project(&f, 9, &DyadicProfile);
    assert!(!outside.resolved && outside.field.max_abs() == 0.0);
}

#[test]
fn bands_reconstruct_field_without_zero_mode() {
    let fh = to_semispectral(&random(5));
    let sum = all_bands(&fh, &DyadicProfile)
        .into_iter()
        .fold(SemiSpectralField::zeros(*fh.grid()), |acc, (_, b)| acc.plus(&b).unwrap());
    let target = remove_zero_mode(&fh);
    assert!(sum.minus(&target).unwrap().max_abs() <= 1e-12 * target.max_abs());
}

#[test]
fn support_containment() {
    let g = lab();
    let fh = to_semispectral(&random(6));
    for (j, b) in all_bands(&fh, &DyadicProfile) {
        let peak = b.max_abs();
        for k in 0..g.n2() {
            let xi = g.xi2(k).abs();
            if xi < pow2(j - 1) || xi > pow2(j + 1) {
                for i in 0..g.n1() {
                    assert!(b.get(i, k).norm() <= 1e-14 * peak);
                }
            }
        }
    }
}

#[test]
fn almost_orthogonality() {
    let fh = to_semispectral(&random(8));
    for (j, k) in [(0, 5), (3, 1), (-2, 0), (4, -2)] {
        assert!(almost_orthogonality_check(&fh, j, k, &DyadicProfile).unwrap() <= 1e-12);
    }
    assert!(matches!(
        almost_orthogonality_check(&fh, 2, 3, &DyadicProfile),
        Err(Error::AdjacentBands { j: 2, k: 3 })
    ));
}

#[test]
fn hybrid_split_cases() {
    let fh = to_semispectral(&random(9));
    let all = hybrid_split(&fh, 1e-3, &DyadicProfile).unwrap();
    assert!(all.low.is_empty());
    let none = hybrid_split(&fh, 1e3, &DyadicProfile).unwrap();
    assert!(none.high.is_empty());
    let at = hybrid_split(&fh, 2.0, &DyadicProfile).unwrap();
    assert!(at.low.iter().any(|(j, _)| *j == 1));
    assert!(at.high.iter().all(|(j, _)| *j >= 2));
    let sum = at
        .high
        .iter()
        .chain(at.low.iter())
        .fold(SemiSpectralField::zeros(*fh.grid()), |acc, (_, b)| acc.plus(b).unwrap());
    assert!(sum.minus(&remove_zero_mode(&fh)).unwrap().max_abs() <= 1e-12 * fh.max_abs());
    assert!(hybrid_split(&fh, 0.0, &DyadicProfile).is_err());
}

#[test]
fn bernstein_constant_is_stable() {
    // || Delta_j f ||_{L^inf_x2} <= C 2^{j/2} || Delta_j f ||_{L^2_x2}, per x1 row
    let mut per_grid = Vec::new();
    for g in [lab(), lab().refined()] {
        let mut sup = 0.0f64;
        let mut per_band = Vec::new();
        for seed in 0..6 {
            let f = EnsembleSpec::new(seed, 1, -1, 3).scalar(&g, 0, 0);
            let fh = to_semispectral(&f);
            for (j, b) in all_bands(&fh, &DyadicProfile) {
                if b.max_abs() <= 1e-9 * fh.max_abs() {
                    continue;
                }
                let b = to_physical(&b).unwrap();
                let two = mixed_norm(&b, f64::INFINITY, 2.0).unwrap();
                let inf = mixed_norm(&b, f64::INFINITY, f64::INFINITY).unwrap();
                let c = inf / (pow2(j).sqrt() * two);
                per_band.push(c);
                sup = sup.max(c);
            }
        }
        let lo = per_band.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(sup.is_finite() && sup < 4.0 * lo.max(0.25), "spread {lo}..{sup}");
        per_grid.push(sup);
    }
    assert!(per_grid[0] / per_grid[1] < 2.0 && per_grid[1] / per_grid[0] < 2.0);
}

#[test]
fn besov_single_band_and_zero() {
    let g = lab();
    let j0 = 2;
    let f = single_mode(g, pow2(j0));
    let params = BesovParams::new(0.7, 2.0, 3.0, 1.0).unwrap();
    let n = besov_norm(&f, &params, &DyadicProfile).unwrap();
    let expect = 2f64.powf(0.7 * j0 as f64) * mixed_norm(&f, 2.0, 3.0).unwrap();
    assert!((n - expect).abs() <= 1e-10 * expect);
    assert_eq!(besov_norm(&ScalarField::zeros(g), &params, &DyadicProfile).unwrap(), 0.0);
    assert!(BesovParams::new(f64::NAN, 2.0, 2.0, 1.0).is_err());
    assert!(BesovParams::new(0.0, 0.9, 2.0, 1.0).is_err());
}

#[test]
fn q_monotonicity() {
    let f = random(12);
    let n = |q| besov_norm(&f, &BesovParams::new(0.3, 2.0, 2.0, q).unwrap(), &DyadicProfile).unwrap();
    assert!(n(f64::INFINITY) < n(1.0));
}

#[test]
fn hybrid_partition_identity() {
    let f = random(13);
    let params = BesovParams::new(-0.4, 2.0, 2.0, 2.0).unwrap();
    let full = besov_norm(&f, &params, &DyadicProfile).unwrap();
    let (h, l) = hybrid_norms(&f, &params, &HybridContext::new(1.0).unwrap(), &DyadicProfile).unwrap();
    assert!(((h * h + l * l).sqrt() - full).abs() <= 1e-12 * full);
    let (h, l) = hybrid_norms(&f, &params, &HybridContext::new(1e3).unwrap(), &DyadicProfile).unwrap();
    assert_eq!(h, 0.0);
    assert!((l - full).abs() <= 1e-14 * full);
    let (h, l) = hybrid_norms(&f, &params, &HybridContext::new(1e-3).unwrap(), &DyadicProfile).unwrap();
    assert_eq!(l, 0.0);
    assert!((h - full).abs() <= 1e-14 * full);
}

#[test]
fn composite_norms_single_band() {
    let g = lab();
    let tp = ThmParams::new(2.0, 2.0, 1.0).unwrap();
    let j0 = 2;
    let c = single_mode(g, pow2(j0));
    let z = ScalarField::zeros(g);
    let f = TensorForcing::new(c.clone(), z.clone(), z.clone(), z.clone()).unwrap();
    let m = mixed_norm(&c, 2.0, 2.0).unwrap();
    let ctx = HybridContext::new(1.0).unwrap();
    let d = data_norm_d(&f, &tp, &ctx, &DyadicProfile).unwrap();
    let expect = 2f64.powf(tp.s_data_high() * j0 as f64) * m;
    assert!((d - expect).abs() <= 1e-10 * expect);
    let ctx = HybridContext::new(8.0).unwrap();
    let s = solution_norm_s(&c, &tp, &ctx, &DyadicProfile).unwrap();
    let expect = 2f64.powf(tp.s_sol_low() * j0 as f64) * m;
    assert!((s - expect).abs() <= 1e-10 * expect);
    assert_eq!(data_norm_d(&TensorForcing::zeros(g), &tp, &ctx, &DyadicProfile).unwrap(), 0.0);
}

#[test]
fn dyadic_rescale_cases() {
    let f = random(14);
    assert_eq!(dyadic_rescale(&f, 1.0, 2).unwrap(), f);
    let r = dyadic_rescale(&f, 2.0, 2).unwrap();
    assert_eq!(r.grid().l1(), f.grid().l1() / 2.0);
    assert_eq!(r.max_abs(), 4.0 * f.max_abs());
    let back = dyadic_rescale(&r, 0.5, 2).unwrap();
    assert_eq!(back, f);
    assert!(matches!(dyadic_rescale(&f, 3.0, 1), Err(Error::NonDyadic(_))));
}

#[test]
fn scaling_invariance_of_composite_norms() {
    let g = lab();
    let tp = ThmParams::new(2.5, 1.5, 2.0).unwrap();
    let ens = EnsembleSpec::new(21, 3, -1, 3);
    for i in 0..ens.count {
        let f = ens.tensor(&g, i);
        let u = ens.vector(&g, i);
        for alpha in [0.5, 3.0] {
            let d = data_norm_d(&f, &tp, &HybridContext::new(alpha).unwrap(), &DyadicProfile).unwrap();
            let s = solution_norm_s(&u, &tp, &HybridContext::new(alpha).unwrap(), &DyadicProfile).unwrap();
            for lambda in [0.5, 2.0] {
                let ctx = HybridContext::new(lambda * alpha).unwrap();
                let dl = data_norm_d(&rescale_tensor(&f, lambda).unwrap(), &tp, &ctx, &DyadicProfile).unwrap();
                let sl = solution_norm_s(&rescale_vector(&u, lambda).unwrap(), &tp, &ctx, &DyadicProfile).unwrap();
                assert!((dl - d).abs() <= 1e-12 * d, "D: {dl} vs {d}");
                assert!((sl - s).abs() <= 1e-12 * s, "S: {sl} vs {s}");
            }
        }
    }
}

#[test]
fn unresolved_fraction_sees_zero_mode() {
    let g = lab();
    assert!(unresolved_fraction(&random(1)) <= 1e-15);
    let mut fh = to_semispectral(&random(1));
    for i in 0..g.n1() {
        fh.set(i, 0, Complex64::new(1.0, 0.0));
    }
    assert!(unresolved_fraction(&to_physical(&fh).unwrap()) > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composite_norm_axioms(sa in 0u64..500, sb in 0u64..500, c in -4.0f64..4.0, alpha in 0.2f64..5.0) {
        let g = Grid2::new(8.0 * PI, 32, 4.0 * PI, 64).unwrap();
        let tp = ThmParams::new(2.0, 2.0, 1.0).unwrap();
        let ctx = HybridContext::new(alpha).unwrap();
        let a = EnsembleSpec::new(sa, 1, -1, 2).tensor(&g, 0);
        let b = EnsembleSpec::new(sb, 1, -1, 2).tensor(&g, 0);
        let n = |f: &TensorForcing| data_norm_d(f, &tp, &ctx, &DyadicProfile).unwrap();
        let (na, nb) = (n(&a), n(&b));
        prop_assert!((n(&a.scaled(c)) - c.abs() * na).abs() <= 1e-12 * na);
        prop_assert!(n(&a.add_scaled(&b, 1.0).unwrap()) <= (na + nb) * (1.0 + 1e-12));
        let s = |f: &TensorForcing| solution_norm_s(f, &tp, &ctx, &DyadicProfile).unwrap();
        prop_assert!(s(&a.add_scaled(&b, 1.0).unwrap()) <= (s(&a) + s(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn besov_triangle_and_embedding(sa in 0u64..500, sb in 0u64..500, s in -1.5f64..1.5,
                                    p1 in 1.0f64..5.0, p2 in 1.0f64..5.0) {
        let g = Grid2::new(8.0 * PI, 32, 4.0 * PI, 64).unwrap();
        let a = EnsembleSpec::new(sa, 1, -1, 2).scalar(&g, 0, 0);
        let b = EnsembleSpec::new(sb, 1, -1, 2).scalar(&g, 0, 1);
        let params = BesovParams::new(s, p1, p2, 1.5).unwrap();
        let n = |f: &ScalarField| besov_norm(f, &params, &DyadicProfile).unwrap();
        prop_assert!(n(&a.plus(&b).unwrap()) <= (n(&a) + n(&b)) * (1.0 + 1e-12));
        let inf = besov_norm(&a, &BesovParams::new(s, p1, p2, f64::INFINITY).unwrap(), &DyadicProfile).unwrap();
        let one = besov_norm(&a, &BesovParams::new(s, p1, p2, 1.0).unwrap(), &DyadicProfile).unwrap();
        prop_assert!(inf <= one * (1.0 + 1e-12));
    }

    #[test]
    fn partition_of_unity_everywhere(xi in 1e-3f64..1e3) {
        let j0 = xi.log2().floor() as i32;
        let s: f64 = (j0 - 3..=j0 + 3).map(|j| DyadicProfile.phi(j, xi)).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }
}
