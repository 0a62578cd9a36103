use num_complex::Complex64;
use proptest::prelude::*;

use cw_spectra::cw::{
    exact_config_prob, product_moment_exact, restandardize, sample_cw_matrix_definetti,
    unrestandardize, CwParams, Magnetization, SpinSumPmf,
};
use cw_spectra::diagnostics::{delta_residual, ks_distance, stieltjes_shift_check};
use cw_spectra::laws::{
    complex_sqrt_upper, mp_self_consistent_residual, mp_stieltjes, semicircle_cdf,
    semicircle_stieltjes,
};
use cw_spectra::linalg::DenseMatrix;
use cw_spectra::spectra::{
    histogram, rescale_null, sample_covariance, symmetric_eigenvalues, Esd, Normalization,
};

fn symmetric(n: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| {
        DenseMatrix::from_fn(
            n,
            n,
            |i, j| if i >= j { v[i * n + j] } else { v[j * n + i] },
        )
    })
}

fn upper_half() -> impl Strategy<Value = Complex64> {
    (-5.0f64..5.0, 1e-3f64..5.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_is_symmetric_and_normalized(beta in 0.0f64..3.0, n in 1usize..400) {
        let pmf = SpinSumPmf::new(beta, n).unwrap();
        let total: f64 = pmf.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for (k, p) in pmf.iter() {
            prop_assert_eq!(p, pmf.prob_of_sum(-k));
        }
    }

    #[test]
    fn config_prob_is_exchangeable(beta in 0.0f64..3.0, cfg in prop::collection::vec(prop::bool::ANY, 1..14), rot in 0usize..13) {
        let cfg: Vec<i8> = cfg.into_iter().map(|b| if b { 1 } else { -1 }).collect();
        let p = exact_config_prob(beta, &cfg).unwrap();
        let flipped: Vec<i8> = cfg.iter().map(|v| -v).collect();
        let mut rotated = cfg.clone();
        rotated.rotate_left(rot % cfg.len());
        prop_assert!(p > 0.0 && p < 1.0);
        prop_assert_eq!(p, exact_config_prob(beta, &flipped).unwrap());
        prop_assert_eq!(p, exact_config_prob(beta, &rotated).unwrap());
    }

    #[test]
    fn odd_product_moments_vanish(beta in 0.0f64..3.0, n in 3usize..300, half in 0usize..5) {
        let l = 2 * half + 1;
        prop_assume!(l <= n);
        prop_assert_eq!(product_moment_exact(beta, n, l).unwrap(), 0.0);
    }

    #[test]
    fn eigenvalue_invariants(a in (1usize..12).prop_flat_map(symmetric)) {
        let s = symmetric_eigenvalues(&a).unwrap();
        let scale = a.frobenius_norm().max(1.0);
        let sum: f64 = s.eigenvalues().iter().sum();
        let sq: f64 = s.eigenvalues().iter().map(|v| v * v).sum();
        prop_assert!((sum - a.trace()).abs() <= 1e-10 * scale * a.rows() as f64);
        prop_assert!((sq - a.frobenius_norm().powi(2)).abs() <= 1e-10 * scale * scale);
        for w in s.eigenvalues().windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn covariance_is_psd_with_rank_bound(beta in 0.01f64..2.0, p in 1usize..25, n in 1usize..25, seed in any::<u64>()) {
        let x = sample_cw_matrix_definetti(&CwParams::new(beta, p, n).unwrap(), seed).unwrap();
        let spec = sample_covariance(&x).spectrum().unwrap();
        let top = spec.top().unwrap();
        prop_assert!(spec.eigenvalues().iter().all(|&v| v >= -1e-9 * top));
        let positive = spec.eigenvalues().iter().filter(|&&v| v > 1e-9 * top).count();
        prop_assert!(positive <= p.min(n));
    }

    #[test]
    fn null_rescaling_is_affine_on_spectra(beta in 0.01f64..2.0, p in 1usize..20, n in 1usize..40, seed in any::<u64>()) {
        let x = sample_cw_matrix_definetti(&CwParams::new(beta, p, n).unwrap(), seed).unwrap();
        let v = sample_covariance(&x);
        let direct = rescale_null(&v).unwrap().spectrum().unwrap();
        let s = (n as f64 / p as f64).sqrt();
        let mapped = v.spectrum().unwrap().affine(1.0, s, Normalization::Null);
        for (a, b) in direct.eigenvalues().iter().zip(mapped.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-12 * s.max(1.0) * p as f64, "{} vs {}", a, b);
        }
    }

    #[test]
    fn restandardize_inverts(m in 0.01f64..0.99, seed in any::<u64>(), p in 1usize..6, n in 1usize..6) {
        let mag = Magnetization::from_value(m).unwrap();
        let x = sample_cw_matrix_definetti(&CwParams::new(mag.beta(), p, n).unwrap(), seed).unwrap();
        let z = restandardize(&x, &mag).unwrap();
        let back = unrestandardize(&z).unwrap();
        for (a, b) in x.entries().iter().zip(back.entries()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn sqrt_branch_rule(re in -1e3f64..1e3, im in -1e3f64..1e3) {
        let z = Complex64::new(re, im);
        let r = complex_sqrt_upper(z);
        prop_assert!(r.im >= 0.0);
        prop_assert!((r * r - z).norm() <= 1e-14 * z.norm().max(f64::MIN_POSITIVE) * 2.0);
        if !(im == 0.0 && re >= 0.0) {
            prop_assert!(r.im > 0.0);
        }
    }

    #[test]
    fn transforms_map_upper_half_plane(z in upper_half(), y in 0.05f64..5.0) {
        let s = mp_stieltjes(y, z).unwrap();
        prop_assert!(s.im > 0.0);
        prop_assert!(mp_self_consistent_residual(y, z, s).norm() <= 1e-10 * (1.0 + z.norm()));
        prop_assert!(semicircle_stieltjes(z).unwrap().im > 0.0);
    }

    #[test]
    fn semicircle_cdf_symmetry(x in -3.0f64..3.0, dx in 0.0f64..1.0) {
        prop_assert!((semicircle_cdf(x) + semicircle_cdf(-x) - 1.0).abs() <= 1e-10);
        prop_assert!(semicircle_cdf(x + dx) >= semicircle_cdf(x));
    }

    #[test]
    fn ks_is_a_metric_on_step_cdfs(
        a in prop::collection::vec(-3.0f64..3.0, 1..20),
        b in prop::collection::vec(-3.0f64..3.0, 1..20),
        c in prop::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let (fa, fb, fc) = (Esd::from_values(a), Esd::from_values(b), Esd::from_values(c));
        let ab = ks_distance(&fa, &fb);
        prop_assert!((ab - ks_distance(&fb, &fa)).abs() <= 1e-12);
        prop_assert!(ab <= ks_distance(&fa, &fc) + ks_distance(&fc, &fb) + 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ks_distance(&fa, &fa), 0.0);
    }

    #[test]
    fn histogram_mass_is_one(values in prop::collection::vec(-5.0f64..5.0, 2..60), bins in 1usize..40, drop in 0usize..2) {
        let spec = cw_spectra::spectra::Spectrum::from_eigenvalues(values, Normalization::None);
        let h = histogram(&spec, bins, None, drop).unwrap();
        prop_assert_eq!(h.bins.len(), bins);
        prop_assert!((h.mass() - 1.0).abs() <= 1e-10);
        prop_assert_eq!(h.bins.iter().map(|b| b.count).sum::<usize>(), spec.len() - drop);
    }

    #[test]
    fn shift_identity_and_delta_routes(beta in 0.01f64..1.0, p in 2usize..20, n in 2usize..40, seed in any::<u64>(), z in upper_half()) {
        let x = sample_cw_matrix_definetti(&CwParams::new(beta, p, n).unwrap(), seed).unwrap();
        let spec = sample_covariance(&x).spectrum().unwrap();
        prop_assert!(stieltjes_shift_check(&spec, p, n, z).unwrap() <= 1e-12 * (1.0 + 1.0 / z.im));
        let d = delta_residual(&spec, p, n, z).unwrap();
        prop_assert!(d.denominator[1] <= -d.q[1] * (1.0 - 1e-12));
        if d.q[1] >= 0.5 {
            prop_assert!(d.routes_agree);
        }
    }
}
