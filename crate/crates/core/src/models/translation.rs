//! 2D translation filters: the linear correlation filter and the
//! kernelized dual filter.

use ndarray::{Array2, Array3, Zip};
use rustfft::num_complex::Complex64;

use super::kernel::{kernel_correlation, Kernel};
use crate::error::{Error, Result};
use crate::spectral::{
    argmax, forward_transform, inverse_transform, ridge_dual_spectrum, ridge_filter_spectrum,
    signed_shift, Spectrum2, TargetResponse,
};

/// Feature map shaped `(channels, m, n)`.
pub type FeatureMap = Array3<f64>;

/// Anything that produces a dense response map for a candidate patch.
pub trait TranslationModel {
    fn shape(&self) -> (usize, usize);
    fn response(&self, features: &FeatureMap) -> Result<Array2<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationDetection {
    pub dy: isize,
    pub dx: isize,
    pub peak: f64,
    pub response: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFilterModel {
    /// One filter spectrum per channel, shaped `(channels, m, n)`.
    pub w_hat: Array3<Complex64>,
    pub lambda1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelDualModel {
    pub alpha_hat: Spectrum2,
    pub template: FeatureMap,
    pub kernel: Kernel,
    pub lambda1: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(
            "lambda1",
            format!("must be positive, got {lambda}"),
        ));
    }
    Ok(())
}

fn check_target(features: &FeatureMap, y: &TargetResponse<ndarray::Ix2>) -> Result<()> {
    let (c, m, n) = features.dim();
    if c == 0 || m == 0 || n == 0 {
        return Err(Error::EmptyInput);
    }
    if y.values.dim() != (m, n) {
        return Err(Error::shape(&[m, n], y.values.shape()));
    }
    Ok(())
}

/// Per-channel ridge filters; responses are summed over channels at detection.
pub fn train_linear_cf(
    features: &FeatureMap,
    y: &TargetResponse<ndarray::Ix2>,
    lambda1: f64,
) -> Result<LinearFilterModel> {
    check_target(features, y)?;
    check_lambda(lambda1)?;
    let y_hat = forward_transform(&y.values)?;
    let mut w_hat = Array3::zeros(features.raw_dim());
    for (chan, mut out) in features.outer_iter().zip(w_hat.outer_iter_mut()) {
        let x_hat = forward_transform(&chan.to_owned())?;
        out.assign(&ridge_filter_spectrum(&x_hat, &y_hat, lambda1)?);
    }
    Ok(LinearFilterModel { w_hat, lambda1 })
}

/// Dual coefficients `α̂ = ŷ / (k̂ˣˣ + λ₁)`.
pub fn train_kernel_cf(
    features: &FeatureMap,
    y: &TargetResponse<ndarray::Ix2>,
    kernel: Kernel,
    lambda1: f64,
) -> Result<KernelDualModel> {
    check_target(features, y)?;
    check_lambda(lambda1)?;
    let kernel = kernel.validate()?;
    let kxx = kernel_correlation(features, features, kernel)?;
    let alpha_hat = ridge_dual_spectrum(
        &forward_transform(&kxx)?,
        &forward_transform(&y.values)?,
        lambda1,
    )?;
    Ok(KernelDualModel {
        alpha_hat,
        template: features.clone(),
        kernel,
        lambda1,
    })
}

fn check_features(expected: (usize, usize), channels: Option<usize>, z: &FeatureMap) -> Result<()> {
    let (c, m, n) = z.dim();
    if (m, n) != expected || channels.is_some_and(|ch| ch != c) {
        let exp_c = channels.unwrap_or(c);
        return Err(Error::shape(&[exp_c, expected.0, expected.1], z.shape()));
    }
    Ok(())
}

impl TranslationModel for LinearFilterModel {
    fn shape(&self) -> (usize, usize) {
        let (_, m, n) = self.w_hat.dim();
        (m, n)
    }

    fn response(&self, features: &FeatureMap) -> Result<Array2<f64>> {
        check_features(self.shape(), Some(self.w_hat.dim().0), features)?;
        let mut acc: Spectrum2 = Array2::zeros(self.shape());
        for (chan, w) in features.outer_iter().zip(self.w_hat.outer_iter()) {
            let z_hat = forward_transform(&chan.to_owned())?;
            Zip::from(&mut acc)
                .and(&z_hat)
                .and(&w)
                .for_each(|a, z, w| *a += z * w);
        }
        inverse_transform(&acc)
    }
}

impl TranslationModel for KernelDualModel {
    fn shape(&self) -> (usize, usize) {
        self.alpha_hat.dim()
    }

    fn response(&self, features: &FeatureMap) -> Result<Array2<f64>> {
        check_features(self.shape(), Some(self.template.dim().0), features)?;
        let kxz = kernel_correlation(&self.template, features, self.kernel)?;
        let prod = forward_transform(&kxz)? * &self.alpha_hat;
        inverse_transform(&prod)
    }
}

/// Applies a translation filter and converts the response argmax to a signed
/// displacement in `[-m/2, m/2) x [-n/2, n/2)`. Ties go to the smallest
/// row-major index.
pub fn detect_translation<M: TranslationModel + ?Sized>(
    model: &M,
    features: &FeatureMap,
) -> Result<TranslationDetection> {
    let response = model.response(features)?;
    let (m, n) = response.dim();
    let (idx, peak) = argmax(response.iter()).ok_or(Error::EmptyInput)?;
    Ok(TranslationDetection {
        dy: signed_shift(idx / n, m),
        dx: signed_shift(idx % n, n),
        peak,
        response,
    })
}

/// Linear interpolation of dual coefficients and template.
pub fn update_model(
    old: &KernelDualModel,
    new: &KernelDualModel,
    eta: f64,
) -> Result<KernelDualModel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::param(
            "eta",
            format!("must lie in [0, 1], got {eta}"),
        ));
    }
    if old.alpha_hat.dim() != new.alpha_hat.dim() {
        return Err(Error::shape(old.alpha_hat.shape(), new.alpha_hat.shape()));
    }
    if old.template.dim() != new.template.dim() {
        return Err(Error::shape(old.template.shape(), new.template.shape()));
    }
    let alpha_hat = Zip::from(&old.alpha_hat)
        .and(&new.alpha_hat)
        .map_collect(|a, b| a * (1.0 - eta) + b * eta);
    let template = Zip::from(&old.template)
        .and(&new.template)
        .map_collect(|a, b| a * (1.0 - eta) + b * eta);
    Ok(KernelDualModel {
        alpha_hat,
        template,
        kernel: old.kernel,
        lambda1: old.lambda1,
    })
}
