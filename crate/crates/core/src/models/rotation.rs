//! Rotation estimation from global orientation descriptors: the learned 1D
//! rotation filter and the two direct estimators it is benchmarked against.

use ndarray::Array1;
use rustfft::num_complex::Complex64;

use super::kernel::{kernel_correlation_1d, Kernel};
use crate::error::{Error, Result};
use crate::features::OrientationDescriptor;
use crate::spectral::{
    argmax, forward_transform, inverse_transform, ridge_dual_spectrum, ridge_filter_spectrum,
    signed_shift, Spectrum1, TargetResponse,
};

/// A 1D correlation filter over an orientation descriptor. Both the primal
/// filter `r̂` and the dual coefficients `α̂_r` are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationFilterModel {
    pub r_hat: Spectrum1,
    pub alpha_r_hat: Spectrum1,
    pub template: OrientationDescriptor,
    pub g_hat: Spectrum1,
    pub lambda2: f64,
    pub kernel: Kernel,
    /// Set when trained on a zero descriptor; detection then reports 0°.
    pub inert: bool,
}

impl RotationFilterModel {
    pub fn bin_width(&self) -> f64 {
        self.template.bin_width()
    }

    /// Response of the primal filter: `IFFT(â_new ⊙ r̂)`.
    pub fn primal_response(&self, a_new: &OrientationDescriptor) -> Result<Array1<f64>> {
        check_len(&self.template, a_new)?;
        inverse_transform(&(forward_transform(a_new.bins())? * &self.r_hat))
    }

    /// Response of the dual filter: `IFFT(k̂^{a a_new} ⊙ α̂_r)`.
    pub fn dual_response(&self, a_new: &OrientationDescriptor) -> Result<Array1<f64>> {
        check_len(&self.template, a_new)?;
        let k = kernel_correlation_1d(self.template.bins(), a_new.bins(), self.kernel)?;
        inverse_transform(&(forward_transform(&k)? * &self.alpha_r_hat))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationEstimate {
    pub theta_deg: f64,
    /// Peak of the response the estimate was read from.
    pub peak: f64,
    /// Set for degenerate (zero) descriptors; `theta_deg` is then 0.
    pub low_confidence: bool,
}

impl RotationEstimate {
    fn none() -> Self {
        RotationEstimate {
            theta_deg: 0.0,
            peak: 0.0,
            low_confidence: true,
        }
    }
}

fn check_len(a: &OrientationDescriptor, b: &OrientationDescriptor) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::shape(&[a.len()], &[b.len()]));
    }
    if a.mode() != b.mode() {
        return Err(Error::param("descriptor", "orientation modes differ"));
    }
    Ok(())
}

/// Folds an angle into `[-span/2, span/2)`.
pub fn wrap_angle(theta: f64, span: f64) -> f64 {
    let w = (theta + span / 2.0).rem_euclid(span) - span / 2.0;
    if w >= span / 2.0 {
        w - span
    } else {
        w
    }
}

/// Sub-bin offset of a circular peak from a parabola through the peak and
/// its two neighbors, in `[-0.5, 0.5]`.
pub fn parabolic_offset(values: &Array1<f64>, idx: usize) -> f64 {
    let b = values.len();
    let left = values[(idx + b - 1) % b];
    let mid = values[idx];
    let right = values[(idx + 1) % b];
    let curvature = left - 2.0 * mid + right;
    if curvature >= 0.0 {
        return 0.0;
    }
    let offset = (0.5 * (left - right) / curvature).clamp(-0.5, 0.5);
    // symmetric peaks must refine to exactly zero
    if offset.abs() < 1e-9 {
        0.0
    } else {
        offset
    }
}

fn estimate_from_response(
    response: &Array1<f64>,
    bin_width: f64,
    span: f64,
    refine: bool,
) -> RotationEstimate {
    let b = response.len();
    let (idx, peak) = argmax(response.iter()).expect("non-empty response");
    let mut shift = signed_shift(idx, b) as f64;
    if refine {
        shift += parabolic_offset(response, idx);
    }
    RotationEstimate {
        theta_deg: wrap_angle(shift * bin_width, span),
        peak,
        low_confidence: false,
    }
}

/// Trains the rotation filter on descriptor `a` with 1D target `g`.
pub fn train_rotation_filter(
    a: &OrientationDescriptor,
    g: &TargetResponse<ndarray::Ix1>,
    lambda2: f64,
    kernel: Kernel,
) -> Result<RotationFilterModel> {
    if a.len() != g.values.len() {
        return Err(Error::shape(&[a.len()], g.values.shape()));
    }
    if !(lambda2 >= 0.0) || !lambda2.is_finite() {
        return Err(Error::param(
            "lambda2",
            format!("must be >= 0, got {lambda2}"),
        ));
    }
    let kernel = kernel.validate()?;
    let g_hat = forward_transform(&g.values)?;
    if a.is_degenerate() {
        let zeros = Array1::from_elem(a.len(), Complex64::new(0.0, 0.0));
        return Ok(RotationFilterModel {
            r_hat: zeros.clone(),
            alpha_r_hat: zeros,
            template: a.clone(),
            g_hat,
            lambda2,
            kernel,
            inert: true,
        });
    }
    let a_hat = forward_transform(a.bins())?;
    let r_hat = ridge_filter_spectrum(&a_hat, &g_hat, lambda2)?;
    let k_aa = kernel_correlation_1d(a.bins(), a.bins(), kernel)?;
    let alpha_r_hat = ridge_dual_spectrum(&forward_transform(&k_aa)?, &g_hat, lambda2)?;
    Ok(RotationFilterModel {
        r_hat,
        alpha_r_hat,
        template: a.clone(),
        g_hat,
        lambda2,
        kernel,
        inert: false,
    })
}

/// Reads the rotation between the training descriptor and `a_new` off the
/// dual filter response peak.
pub fn detect_rotation_filter(
    model: &RotationFilterModel,
    a_new: &OrientationDescriptor,
    refine: bool,
) -> Result<RotationEstimate> {
    check_len(&model.template, a_new)?;
    if model.inert || a_new.is_degenerate() {
        return Ok(RotationEstimate::none());
    }
    let response = model.dual_response(a_new)?;
    Ok(estimate_from_response(
        &response,
        model.bin_width(),
        a_new.mode().span_deg(),
        refine,
    ))
}

/// Rotation from the peak of the circular cross-correlation of two descriptors.
pub fn detect_rotation_correlation(
    a_old: &OrientationDescriptor,
    a_new: &OrientationDescriptor,
    refine: bool,
) -> Result<RotationEstimate> {
    check_len(a_old, a_new)?;
    if a_old.is_degenerate() || a_new.is_degenerate() {
        return Ok(RotationEstimate::none());
    }
    let corr = kernel_correlation_1d(a_old.bins(), a_new.bins(), Kernel::Linear)?;
    Ok(estimate_from_response(
        &corr,
        a_old.bin_width(),
        a_old.mode().span_deg(),
        refine,
    ))
}

/// Rotation from the displacement of the descriptor maximum.
pub fn detect_rotation_maxshift(
    a_old: &OrientationDescriptor,
    a_new: &OrientationDescriptor,
) -> Result<RotationEstimate> {
    check_len(a_old, a_new)?;
    if a_old.is_degenerate() || a_new.is_degenerate() {
        return Ok(RotationEstimate::none());
    }
    let b = a_old.len();
    let (i_old, _) = argmax(a_old.bins().iter()).expect("non-empty");
    let (i_new, peak) = argmax(a_new.bins().iter()).expect("non-empty");
    let shift = signed_shift((i_new + b - i_old) % b, b);
    Ok(RotationEstimate {
        theta_deg: wrap_angle(shift as f64 * a_old.bin_width(), a_old.mode().span_deg()),
        peak,
        low_confidence: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::OrientationMode;
    use crate::spectral::{dense_circulant_ridge_oracle, gaussian_target_1d};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_descriptor(rng: &mut ChaCha8Rng, b: usize) -> OrientationDescriptor {
        let bins = Array1::from_shape_fn(b, |_| rng.random_range(0.0..1.0));
        OrientationDescriptor::from_bins(bins, OrientationMode::Unsigned180).unwrap()
    }

    #[test]
    fn impulse_descriptor_with_zero_lambda_copies_target() {
        let mut bins = Array1::zeros(16);
        bins[0] = 1.0;
        let a = OrientationDescriptor::from_bins(bins, OrientationMode::Unsigned180).unwrap();
        let g = gaussian_target_1d(16, 2.0).unwrap();
        let model = train_rotation_filter(&a, &g, 0.0, Kernel::Linear).unwrap();
        for (r, g) in model.r_hat.iter().zip(model.g_hat.iter()) {
            assert!((r - g).norm() < 1e-12);
        }
    }

    #[test]
    fn primal_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_descriptor(&mut rng, 32);
        let g = gaussian_target_1d(32, 2.0).unwrap();
        let model = train_rotation_filter(&a, &g, 0.01, Kernel::Linear).unwrap();
        let r = inverse_transform(&model.r_hat).unwrap();
        let dense = dense_circulant_ridge_oracle(a.bins(), &g.values, 0.01).unwrap();
        let err: f64 = r
            .iter()
            .zip(dense.iter())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / norm < 1e-8);
    }

    #[test]
    fn huge_lambda_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let a = random_descriptor(&mut rng, 32);
        let g = gaussian_target_1d(32, 2.0).unwrap();
        let model = train_rotation_filter(&a, &g, 1e12, Kernel::Linear).unwrap();
        assert!(model.r_hat.iter().all(|v| v.norm() < 1e-9));
    }

    #[test]
    fn linear_kernel_primal_and_dual_responses_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a = random_descriptor(&mut rng, 90);
        let z = random_descriptor(&mut rng, 90);
        let g = gaussian_target_1d(90, 90.0 / 16.0).unwrap();
        let model = train_rotation_filter(&a, &g, 1e-4, Kernel::Linear).unwrap();
        let p = model.primal_response(&z).unwrap();
        let d = model.dual_response(&z).unwrap();
        for (x, y) in p.iter().zip(d.iter()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn self_match_is_zero_and_shift_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = gaussian_target_1d(90, 90.0 / 16.0).unwrap();
        for kernel in [Kernel::Linear, Kernel::Gaussian { sigma: 0.5 }] {
            let a = random_descriptor(&mut rng, 90);
            let model = train_rotation_filter(&a, &g, 1e-4, kernel).unwrap();
            assert_eq!(
                detect_rotation_filter(&model, &a, true).unwrap().theta_deg,
                0.0
            );
            for k in [5isize, -12, 30] {
                let est = detect_rotation_filter(&model, &a.shifted(k), false).unwrap();
                assert_eq!(est.theta_deg, k as f64 * 2.0);
            }
        }
    }

    #[test]
    fn correlation_estimator() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let a = random_descriptor(&mut rng, 90);
        assert_eq!(
            detect_rotation_correlation(&a, &a, true).unwrap().theta_deg,
            0.0
        );
        let est = detect_rotation_correlation(&a, &a.shifted(-7), false).unwrap();
        assert_eq!(est.theta_deg, -14.0);
        let zero =
            OrientationDescriptor::from_bins(Array1::zeros(90), OrientationMode::Unsigned180)
                .unwrap();
        let est = detect_rotation_correlation(&zero, &a, true).unwrap();
        assert_eq!(est.theta_deg, 0.0);
        assert!(est.low_confidence);
    }

    #[test]
    fn maxshift_estimator() {
        let mut bins = Array1::from_elem(36, 0.05);
        bins[10] = 1.0;
        let a = OrientationDescriptor::from_bins(bins, OrientationMode::Unsigned180).unwrap();
        assert_eq!(detect_rotation_maxshift(&a, &a).unwrap().theta_deg, 0.0);
        assert_eq!(
            detect_rotation_maxshift(&a, &a.shifted(4))
                .unwrap()
                .theta_deg,
            20.0
        );
        assert_eq!(
            detect_rotation_maxshift(&a, &a.shifted(-3))
                .unwrap()
                .theta_deg,
            -15.0
        );
    }

    #[test]
    fn maxshift_flips_on_bimodal_swap() {
        // two modes 60° apart; the secondary overtakes the primary while the
        // true rotation is only one bin (5°)
        let mut old = Array1::from_elem(36, 0.02);
        old[6] = 1.0;
        old[18] = 0.9;
        let mut new = Array1::from_elem(36, 0.02);
        new[7] = 0.9;
        new[19] = 1.0;
        let old = OrientationDescriptor::from_bins(old, OrientationMode::Unsigned180).unwrap();
        let new = OrientationDescriptor::from_bins(new, OrientationMode::Unsigned180).unwrap();
        let max = detect_rotation_maxshift(&old, &new).unwrap().theta_deg;
        let corr = detect_rotation_correlation(&old, &new, false)
            .unwrap()
            .theta_deg;
        assert_eq!(max, 65.0);
        assert_eq!(corr, 5.0);
    }

    #[test]
    fn zero_descriptor_gives_inert_filter() {
        let zero =
            OrientationDescriptor::from_bins(Array1::zeros(36), OrientationMode::Unsigned180)
                .unwrap();
        let g = gaussian_target_1d(36, 2.0).unwrap();
        let model = train_rotation_filter(&zero, &g, 1e-4, Kernel::Linear).unwrap();
        assert!(model.inert);
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let est = detect_rotation_filter(&model, &random_descriptor(&mut rng, 36), true).unwrap();
        assert_eq!(est.theta_deg, 0.0);
        assert!(est.low_confidence);
    }

    #[test]
    fn length_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = random_descriptor(&mut rng, 36);
        let b = random_descriptor(&mut rng, 40);
        assert!(detect_rotation_correlation(&a, &b, true).is_err());
        assert!(detect_rotation_maxshift(&a, &b).is_err());
        let g = gaussian_target_1d(40, 2.0).unwrap();
        assert!(train_rotation_filter(&a, &g, 1e-4, Kernel::Linear).is_err());
    }

    #[test]
    fn refinement_recovers_half_bin() {
        // symmetric peak straddling bins 3 and 4 sits at 3.5
        let mut resp = Array1::zeros(16);
        resp[2] = 0.2;
        resp[3] = 1.0;
        resp[4] = 1.0;
        resp[5] = 0.2;
        assert!((parabolic_offset(&resp, 3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(90.0, 180.0), -90.0);
        assert_eq!(wrap_angle(-90.0, 180.0), -90.0);
        assert_eq!(wrap_angle(100.0, 180.0), -80.0);
        assert_eq!(wrap_angle(-181.0, 360.0), 179.0);
    }
}
