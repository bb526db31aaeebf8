//! Discrete Fourier transforms, window and target generators, and the
//! circulant ridge-regression solvers shared by the 2D translation filter
//! and the 1D rotation filter.
//!
//! Conventions used throughout the crate:
//! - forward transform is unnormalized, inverse is scaled by `1/N`;
//! - the peak of every regression target sits at element index 0 in every
//!   dimension (a circularly wrapped Gaussian), so a zero displacement means
//!   an argmax at index 0;
//! - array indices are converted to signed shifts in `[-L/2, L/2)` per axis.

pub mod oracle;

use std::cell::RefCell;

use ndarray::{Array, Array1, Array2, ArrayD, Axis, Dimension, IxDyn, Zip};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub use oracle::dense_circulant_ridge_oracle;

/// Frequency-domain coefficients in standard DFT index order.
pub type Spectrum<D> = Array<Complex64, D>;
pub type Spectrum1 = Spectrum<ndarray::Ix1>;
pub type Spectrum2 = Spectrum<ndarray::Ix2>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_axes<D: Dimension>(data: &mut Array<Complex64, D>, inverse: bool) {
    for axis in 0..data.ndim() {
        let len = data.len_of(Axis(axis));
        if len <= 1 {
            continue;
        }
        let fft = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            if inverse {
                p.plan_fft_inverse(len)
            } else {
                p.plan_fft_forward(len)
            }
        });
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process(&mut buf);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

/// Unnormalized forward DFT over every axis of a real grid.
pub fn forward_transform<D: Dimension>(signal: &Array<f64, D>) -> Result<Spectrum<D>> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut data = signal.mapv(|v| Complex64::new(v, 0.0));
    transform_axes(&mut data, false);
    Ok(data)
}

/// Forward DFT of an already complex grid.
pub fn forward_transform_complex<D: Dimension>(signal: &Spectrum<D>) -> Result<Spectrum<D>> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut data = signal.clone();
    transform_axes(&mut data, false);
    Ok(data)
}

/// Inverse DFT scaled by `1/N`, keeping the complex result.
pub fn inverse_transform_complex<D: Dimension>(spec: &Spectrum<D>) -> Result<Spectrum<D>> {
    if spec.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut data = spec.clone();
    transform_axes(&mut data, true);
    let scale = 1.0 / data.len() as f64;
    data.mapv_inplace(|v| v * scale);
    Ok(data)
}

/// Inverse DFT scaled by `1/N`, returning the real part.
pub fn inverse_transform<D: Dimension>(spec: &Spectrum<D>) -> Result<Array<f64, D>> {
    Ok(inverse_transform_complex(spec)?.mapv(|v| v.re))
}

/// Converts an index along an axis of length `len` to a signed shift in
/// `[-len/2, len/2)`.
pub fn signed_shift(index: usize, len: usize) -> isize {
    if index >= len.div_ceil(2) && len > 1 {
        index as isize - len as isize
    } else {
        index as isize
    }
}

/// Index of the maximum element in logical (row-major) order; ties go to
/// the smallest index.
pub fn argmax<'a>(values: impl IntoIterator<Item = &'a f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

/// Gaussian regression target with its peak at index 0 in every dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetResponse<D: Dimension> {
    pub values: Array<f64, D>,
    pub sigma: f64,
}

fn gaussian_target_dyn(shape: &[usize], sigma: f64) -> Result<ArrayD<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::EmptyInput);
    }
    let denom = 2.0 * sigma * sigma;
    Ok(ArrayD::from_shape_fn(IxDyn(shape), |idx| {
        let d2: f64 = (0..shape.len())
            .map(|ax| {
                let s = signed_shift(idx[ax], shape[ax]) as f64;
                s * s
            })
            .sum();
        (-d2 / denom).exp()
    }))
}

pub fn gaussian_target_1d(len: usize, sigma: f64) -> Result<TargetResponse<ndarray::Ix1>> {
    let values = gaussian_target_dyn(&[len], sigma)?
        .into_dimensionality()
        .expect("1d shape");
    Ok(TargetResponse { values, sigma })
}

pub fn gaussian_target_2d(
    shape: (usize, usize),
    sigma: f64,
) -> Result<TargetResponse<ndarray::Ix2>> {
    let values = gaussian_target_dyn(&[shape.0, shape.1], sigma)?
        .into_dimensionality()
        .expect("2d shape");
    Ok(TargetResponse { values, sigma })
}

fn hann(len: usize) -> Array1<f64> {
    let denom = (len - 1) as f64;
    Array1::from_shape_fn(len, |i| {
        0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / denom).cos())
    })
}

/// Outer product of two Hann profiles; zero on the border frame.
pub fn cosine_window(shape: (usize, usize)) -> Result<Array2<f64>> {
    let (m, n) = shape;
    if m < 2 || n < 2 {
        return Err(Error::param(
            "shape",
            format!("cosine window needs >= 2 per axis, got {m}x{n}"),
        ));
    }
    let (hr, hc) = (hann(m), hann(n));
    let mut w = Array2::from_shape_fn((m, n), |(i, j)| hr[i] * hc[j]);
    // exact zeros on the border regardless of cos rounding
    w.row_mut(0).fill(0.0);
    w.row_mut(m - 1).fill(0.0);
    w.column_mut(0).fill(0.0);
    w.column_mut(n - 1).fill(0.0);
    Ok(w)
}

/// Centered Gaussian envelope with peak 1 at the geometric center.
pub fn gaussian_window(shape: (usize, usize), sigma: f64) -> Result<Array2<f64>> {
    let (m, n) = shape;
    if m == 0 || n == 0 {
        return Err(Error::param(
            "shape",
            "gaussian window needs non-empty dims",
        ));
    }
    if !(sigma > 0.0) {
        return Err(Error::param(
            "sigma",
            format!("must be positive, got {sigma}"),
        ));
    }
    let (cr, cc) = ((m as f64 - 1.0) / 2.0, (n as f64 - 1.0) / 2.0);
    let denom = 2.0 * sigma * sigma;
    Ok(Array2::from_shape_fn((m, n), |(i, j)| {
        let (dr, dc) = (i as f64 - cr, j as f64 - cc);
        (-(dr * dr + dc * dc) / denom).exp()
    }))
}

fn check_same_shape<A, B, D: Dimension>(a: &Array<A, D>, b: &Array<B, D>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(a.shape(), b.shape()));
    }
    Ok(())
}

/// Closed-form ridge regression over all circular shifts:
/// `(conj(x̂) ⊙ ŷ) / (conj(x̂) ⊙ x̂ + λ)`.
pub fn ridge_filter_spectrum<D: Dimension>(
    x_hat: &Spectrum<D>,
    y_hat: &Spectrum<D>,
    lambda: f64,
) -> Result<Spectrum<D>> {
    check_same_shape(x_hat, y_hat)?;
    if !(lambda >= 0.0) {
        return Err(Error::param(
            "lambda",
            format!("must be >= 0, got {lambda}"),
        ));
    }
    if let Some(index) = x_hat.iter().position(|x| x.norm_sqr() + lambda == 0.0) {
        return Err(Error::ZeroDenominator { index });
    }
    Ok(Zip::from(x_hat)
        .and(y_hat)
        .map_collect(|x, y| x.conj() * y / (x.norm_sqr() + lambda)))
}

/// Dual-domain closed form `ŷ / (k̂ + λ)`.
pub fn ridge_dual_spectrum<D: Dimension>(
    k_hat: &Spectrum<D>,
    y_hat: &Spectrum<D>,
    lambda: f64,
) -> Result<Spectrum<D>> {
    check_same_shape(k_hat, y_hat)?;
    if !(lambda >= 0.0) {
        return Err(Error::param(
            "lambda",
            format!("must be >= 0, got {lambda}"),
        ));
    }
    if let Some(index) = k_hat.iter().position(|k| (k + lambda).norm_sqr() == 0.0) {
        return Err(Error::ZeroDenominator { index });
    }
    Ok(Zip::from(k_hat)
        .and(y_hat)
        .map_collect(|k, y| y / (k + lambda)))
}
