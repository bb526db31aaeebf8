use ndarray::{Array, Array1, Array2, Array3, Dimension, Zip};

use crate::error::{Error, Result};
use crate::spectral::{forward_transform, inverse_transform, Spectrum};

/// Kernel used to build the kernel vector over all circular shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// Plain inner product; makes the dual solution equal the primal one.
    Linear,
    Gaussian {
        sigma: f64,
    },
}

impl Kernel {
    pub fn validate(self) -> Result<Self> {
        match self {
            Kernel::Gaussian { sigma } if !(sigma > 0.0) || !sigma.is_finite() => Err(
                Error::param("kernel_sigma", format!("must be positive, got {sigma}")),
            ),
            k => Ok(k),
        }
    }
}

/// Circular cross-correlation `c[τ] = Σ_j x[j]·z[j + τ]` computed spectrally.
fn cross_correlation<D: Dimension>(
    x_hat: &Spectrum<D>,
    z_hat: &Spectrum<D>,
) -> Result<Array<f64, D>> {
    let prod = Zip::from(x_hat).and(z_hat).map_collect(|a, b| a.conj() * b);
    inverse_transform(&prod)
}

fn gaussian_from_correlation<D: Dimension>(
    mut corr: Array<f64, D>,
    xx: f64,
    zz: f64,
    sigma: f64,
) -> Array<f64, D> {
    let inv = 1.0 / (sigma * sigma);
    corr.mapv_inplace(|c| (-(xx + zz - 2.0 * c).max(0.0) * inv).exp());
    corr
}

fn check_features(x: &Array3<f64>, z: &Array3<f64>) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.shape() != z.shape() {
        return Err(Error::shape(x.shape(), z.shape()));
    }
    Ok(())
}

/// Channel-summed circular cross-correlation of two `(channels, m, n)` maps.
pub fn linear_kernel_correlation(x: &Array3<f64>, z: &Array3<f64>) -> Result<Array2<f64>> {
    check_features(x, z)?;
    let (_, m, n) = x.dim();
    let mut acc = Array2::zeros((m, n));
    for (xc, zc) in x.outer_iter().zip(z.outer_iter()) {
        let xh = forward_transform(&xc.to_owned())?;
        let zh = forward_transform(&zc.to_owned())?;
        acc += &cross_correlation(&xh, &zh)?;
    }
    Ok(acc)
}

/// Gaussian kernel vector over all 2D circular shifts:
/// `k[τ] = exp(-‖x - z(· + τ)‖² / σ²)`, with the squared distance expanded
/// through the spectral cross-correlation and clamped at zero.
pub fn gaussian_kernel_correlation(
    x: &Array3<f64>,
    z: &Array3<f64>,
    sigma: f64,
) -> Result<Array2<f64>> {
    Kernel::Gaussian { sigma }.validate()?;
    let corr = linear_kernel_correlation(x, z)?;
    let xx = x.iter().map(|v| v * v).sum();
    let zz = z.iter().map(|v| v * v).sum();
    Ok(gaussian_from_correlation(corr, xx, zz, sigma))
}

pub fn kernel_correlation(x: &Array3<f64>, z: &Array3<f64>, kernel: Kernel) -> Result<Array2<f64>> {
    match kernel {
        Kernel::Linear => linear_kernel_correlation(x, z),
        Kernel::Gaussian { sigma } => gaussian_kernel_correlation(x, z, sigma),
    }
}

/// 1D counterpart of [`kernel_correlation`] for orientation descriptors.
pub fn kernel_correlation_1d(
    a: &Array1<f64>,
    b: &Array1<f64>,
    kernel: Kernel,
) -> Result<Array1<f64>> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a.len() != b.len() {
        return Err(Error::shape(&[a.len()], &[b.len()]));
    }
    let corr = cross_correlation(&forward_transform(a)?, &forward_transform(b)?)?;
    match kernel.validate()? {
        Kernel::Linear => Ok(corr),
        Kernel::Gaussian { sigma } => {
            Ok(gaussian_from_correlation(corr, a.dot(a), b.dot(b), sigma))
        }
    }
}
