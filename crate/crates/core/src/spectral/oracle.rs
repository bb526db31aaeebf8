//! Dense-matrix reference solver for circulant ridge regression.
//!
//! Builds the explicit (block-)circulant data matrix and solves the normal
//! equations directly. O(N³); only meant for cross-checking the spectral
//! solvers on small inputs.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array, Dimension};

use crate::error::{Error, Result};

pub const MAX_ORACLE_SIZE: usize = 4096;

fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for ax in (0..shape.len()).rev() {
        out[ax] = flat % shape[ax];
        flat /= shape[ax];
    }
}

fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &s)| acc * s + i)
}

/// The explicit circulant matrix `X[i, j] = x[(i - j) mod shape]`, with
/// multi-indices flattened row-major. Each column is a circular shift of `x`.
pub fn circulant_matrix<D: Dimension>(x: &Array<f64, D>) -> DMatrix<f64> {
    let shape = x.shape().to_vec();
    let n = x.len();
    let flat: Vec<f64> = x.iter().copied().collect();
    let mut ii = vec![0; shape.len()];
    let mut jj = vec![0; shape.len()];
    let mut kk = vec![0; shape.len()];
    DMatrix::from_fn(n, n, |i, j| {
        unravel(i, &shape, &mut ii);
        unravel(j, &shape, &mut jj);
        for ax in 0..shape.len() {
            kk[ax] = (ii[ax] + shape[ax] - jj[ax]) % shape[ax];
        }
        flat[ravel(&kk, &shape)]
    })
}

/// Solves `(XᵀX + λI) w = Xᵀy` densely for the circulant `X` built from `x`.
pub fn dense_circulant_ridge_oracle<D: Dimension>(
    x: &Array<f64, D>,
    y: &Array<f64, D>,
    lambda: f64,
) -> Result<Array<f64, D>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.shape() != y.shape() {
        return Err(Error::shape(x.shape(), y.shape()));
    }
    if x.len() > MAX_ORACLE_SIZE {
        return Err(Error::param(
            "x",
            format!(
                "oracle limited to {MAX_ORACLE_SIZE} elements, got {}",
                x.len()
            ),
        ));
    }
    if !(lambda >= 0.0) {
        return Err(Error::param(
            "lambda",
            format!("must be >= 0, got {lambda}"),
        ));
    }
    let n = x.len();
    let xm = circulant_matrix(x);
    let yv = DVector::from_iterator(n, y.iter().copied());
    let lhs = xm.transpose() * &xm + DMatrix::identity(n, n) * lambda;
    let rhs = xm.transpose() * yv;
    let w = lhs.lu().solve(&rhs).ok_or(Error::Singular)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(Array::from_shape_vec(x.raw_dim(), w.iter().copied().collect()).expect("shape preserved"))
}
