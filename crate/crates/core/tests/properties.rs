//! Property tests spanning several modules.

use ndarray::Array2;
use proptest::prelude::*;

use rkcf::evaluation::{compute_mho, precision_curve};
use rkcf::features::{apply_window, global_hog, rotate_grid, HogConfig, OrientationMode};
use rkcf::models::{
    detect_rotation_correlation, detect_translation, train_kernel_cf, train_linear_cf, wrap_angle,
    Kernel, TranslationModel,
};
use rkcf::spectral::{cosine_window, gaussian_target_2d};

fn oriented_source(angle: f64, period: f64) -> Array2<f64> {
    Array2::from_shape_fn((72, 72), |(r, c)| {
        let (x, y) = (c as f64 - 36.0, r as f64 - 36.0);
        let (s, co) = angle.to_radians().sin_cos();
        let u = x * co + y * s;
        0.5 + 0.4 * (2.0 * std::f64::consts::PI * u / period).cos()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rotating a smooth grating shifts its descriptor by `round(θ/Δ)` bins,
    /// up to one bin. Short periods are excluded: the centered-difference
    /// gradient bends orientations toward the diagonals at high frequency.
    #[test]
    fn rotation_shifts_descriptor(
        angle in 0.0f64..180.0,
        period in 12.0f64..20.0,
        theta in prop::sample::select(vec![-60.0, -30.0, -10.0, 10.0, 30.0, 60.0]),
        b in prop::sample::select(vec![36usize, 60, 90]),
    ) {
        let hog = HogConfig { bins: b, mode: OrientationMode::Unsigned180, smoothing: true };
        let src = oriented_source(angle, period);
        let crop = |img: &Array2<f64>| img.slice(ndarray::s![12..60, 12..60]).to_owned();
        let w = cosine_window((48, 48)).unwrap();
        let desc = |img: &Array2<f64>| global_hog(apply_window(img.view(), &w).unwrap().view(), &hog).unwrap();
        let a = desc(&crop(&src));
        let a_rot = desc(&crop(&rotate_grid(&src, theta)));
        let est = detect_rotation_correlation(&a, &a_rot, false).unwrap().theta_deg;
        let delta = 180.0 / b as f64;
        let bins = (est / delta).round() as i64;
        let expected = (theta / delta).round() as i64;
        let diff = wrap_angle((bins - expected) as f64 * delta, 180.0) / delta;
        prop_assert!(diff.abs() <= 1.0 + 1e-9, "theta {theta} est {est} delta {delta}");
    }

    /// Single-channel linear filters give the same response in primal and
    /// dual form.
    #[test]
    fn linear_primal_equals_dual(seed in 0u64..1000, lambda in 1e-4f64..1.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = ndarray::Array3::from_shape_fn((1, 12, 10), |_| rng.random_range(-1.0..1.0));
        let z = ndarray::Array3::from_shape_fn((1, 12, 10), |_| rng.random_range(-1.0..1.0));
        let y = gaussian_target_2d((12, 10), 1.5).unwrap();
        let p = train_linear_cf(&x, &y, lambda).unwrap().response(&z).unwrap();
        let d = train_kernel_cf(&x, &y, Kernel::Linear, lambda).unwrap().response(&z).unwrap();
        let scale = p.iter().fold(1e-12f64, |m, v| m.max(v.abs()));
        for (a, b) in p.iter().zip(&d) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    /// Circular shifts of the training features are detected exactly.
    #[test]
    fn translation_equivariance(seed in 0u64..1000, dy in 0usize..16, dx in 0usize..16) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = ndarray::Array3::from_shape_fn((1, 16, 16), |_| rng.random_range(-1.0..1.0) / 16.0);
        let rolled = ndarray::Array3::from_shape_fn((1, 16, 16), |(c, i, j)| x[[c, (i + 16 - dy) % 16, (j + 16 - dx) % 16]]);
        let y = gaussian_target_2d((16, 16), 1.0).unwrap();
        let model = train_kernel_cf(&x, &y, Kernel::Gaussian { sigma: 0.5 }, 1e-4).unwrap();
        let det = detect_translation(&model, &rolled).unwrap();
        let signed = |s: usize| if s >= 8 { s as isize - 16 } else { s as isize };
        prop_assert_eq!((det.dy, det.dx), (signed(dy), signed(dx)));
    }

    #[test]
    fn precision_curve_is_a_cdf(errors in prop::collection::vec(0.0f64..100.0, 1..60)) {
        let c = precision_curve(&errors).unwrap();
        prop_assert_eq!(c.len(), 51);
        prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!(c[50] >= c[20]);
    }

    #[test]
    fn mho_ignores_constant_offsets(thetas in prop::collection::vec(-45.0f64..45.0, 1..40), offset in -30.0f64..30.0) {
        let shifted: Vec<f64> = thetas.iter().map(|t| t + offset).collect();
        let (a, b) = (compute_mho(&thetas).unwrap(), compute_mho(&shifted).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() < 1e-9);
    }
}
