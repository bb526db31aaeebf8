//! Patch extraction, windowing, orientation descriptors and rotation.

mod hog;
mod rotate;

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::spectral::{cosine_window, gaussian_window};

pub use hog::{cell_hog, global_hog, HogConfig, OrientationDescriptor, OrientationMode, MIN_BINS};
pub use rotate::{rotate_displacement, rotate_grid, rotate_patch, sin_cos_deg};

pub const MIN_PATCH_SIDE: usize = 8;

/// An `m x n` intensity grid in `[0, 1]` cut out of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pixels: Array2<f64>,
    /// Source frame index, when known.
    pub frame_index: Option<usize>,
    /// Frame coordinates `(row, col)` of the patch center.
    pub center: (f64, f64),
}

impl Patch {
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        let (m, n) = pixels.dim();
        if m < MIN_PATCH_SIDE || n < MIN_PATCH_SIDE {
            return Err(Error::param(
                "patch",
                format!("needs at least {MIN_PATCH_SIDE}x{MIN_PATCH_SIDE}, got {m}x{n}"),
            ));
        }
        if let Some(v) = pixels
            .iter()
            .find(|v| !v.is_finite() || **v < -1e-9 || **v > 1.0 + 1e-9)
        {
            return Err(Error::param(
                "patch",
                format!("pixel value {v} outside [0, 1]"),
            ));
        }
        Ok(Patch {
            pixels,
            frame_index: None,
            center: (m as f64 / 2.0, n as f64 / 2.0),
        })
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.pixels
    }

    pub fn dim(&self) -> (usize, usize) {
        self.pixels.dim()
    }

    pub fn into_pixels(self) -> Array2<f64> {
        self.pixels
    }
}

/// Cuts an `m x n` window out of `frame`, replicating edge pixels for
/// samples that fall outside. Patch index `(m/2, n/2)` maps to the frame
/// pixel containing `center`.
pub fn extract_patch(
    frame: &Array2<f64>,
    center: (f64, f64),
    size: (usize, usize),
) -> Result<Patch> {
    let (rows, cols) = frame.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyInput);
    }
    let (m, n) = size;
    if m == 0 || n == 0 {
        return Err(Error::param("size", "patch size must be positive"));
    }
    if !center.0.is_finite() || !center.1.is_finite() {
        return Err(Error::param("center", "non-finite center"));
    }
    let top = center.0.floor() as isize - (m / 2) as isize;
    let left = center.1.floor() as isize - (n / 2) as isize;
    let pixels = Array2::from_shape_fn((m, n), |(i, j)| {
        let r = (top + i as isize).clamp(0, rows as isize - 1) as usize;
        let c = (left + j as isize).clamp(0, cols as isize - 1) as usize;
        frame[[r, c]]
    });
    let mut patch = Patch::new(pixels)?;
    patch.center = center;
    Ok(patch)
}

/// Luminance of a `(rows, cols, channels)` image; one channel passes through.
pub fn to_grayscale(image: &Array3<f64>) -> Result<Array2<f64>> {
    let (rows, cols, ch) = image.dim();
    match ch {
        1 => Ok(image.index_axis(ndarray::Axis(2), 0).to_owned()),
        3 => Ok(Array2::from_shape_fn((rows, cols), |(r, c)| {
            0.299 * image[[r, c, 0]] + 0.587 * image[[r, c, 1]] + 0.114 * image[[r, c, 2]]
        })),
        other => Err(Error::param(
            "image",
            format!("expected 1 or 3 channels, got {other}"),
        )),
    }
}

/// Multiplicative boundary envelope applied before Fourier processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Envelope {
    Cosine,
    Gaussian,
}

impl Envelope {
    /// Gaussian envelope width as a fraction of the shorter side.
    pub const GAUSSIAN_SIGMA_FRACTION: f64 = 1.0 / 6.0;

    pub fn window(self, shape: (usize, usize)) -> Result<Array2<f64>> {
        match self {
            Envelope::Cosine => cosine_window(shape),
            Envelope::Gaussian => {
                let side = shape.0.min(shape.1) as f64;
                gaussian_window(shape, side * Self::GAUSSIAN_SIGMA_FRACTION)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Envelope::Cosine => "cos",
            Envelope::Gaussian => "gauss",
        }
    }
}

/// Removes the patch mean and multiplies by `window`.
pub fn apply_window(pixels: ArrayView2<f64>, window: &Array2<f64>) -> Result<Array2<f64>> {
    if pixels.dim() != window.dim() {
        return Err(Error::shape(pixels.shape(), window.shape()));
    }
    let mean = pixels.mean().ok_or(Error::EmptyInput)?;
    Ok(ndarray::Zip::from(&pixels)
        .and(window)
        .map_collect(|p, w| (p - mean) * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn ramp(rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |(r, c)| {
            (r * cols + c) as f64 / (rows * cols) as f64
        })
    }

    #[test]
    fn interior_crop_is_exact() {
        let frame = ramp(32, 40);
        let p = extract_patch(&frame, (16.0, 20.0), (8, 10)).unwrap();
        let expected = frame.slice(ndarray::s![12..20, 15..25]);
        assert_eq!(p.pixels(), &expected);
    }

    #[test]
    fn corner_of_constant_frame_is_constant() {
        let frame = Array2::from_elem((20, 20), 0.25);
        let p = extract_patch(&frame, (0.0, 0.0), (8, 8)).unwrap();
        assert!(p.pixels().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn corner_replicates_edges() {
        // 4x4 ramp r*4+c over 16. An 8x8 patch centered at (0,0) starts at
        // (-4,-4): rows/cols -4..=-1 clamp to 0, then 0..=3.
        let frame = ramp(4, 4);
        let p = extract_patch(&frame, (0.0, 0.0), (8, 8)).unwrap();
        let px = p.pixels();
        for i in 0..8 {
            for j in 0..8 {
                let r = (i as isize - 4).clamp(0, 3) as usize;
                let c = (j as isize - 4).clamp(0, 3) as usize;
                assert_eq!(px[[i, j]], (r * 4 + c) as f64 / 16.0);
            }
        }
        // hand-evaluated: top-left block is the frame's (0,0) value, the last
        // row reads the frame's row 3
        assert_eq!(px[[0, 0]], 0.0);
        assert_eq!(px[[7, 0]], 12.0 / 16.0);
        assert_eq!(px[[7, 7]], 15.0 / 16.0);
        assert_eq!(px[[4, 7]], 3.0 / 16.0);
    }

    #[test]
    fn small_patches_rejected() {
        assert!(Patch::new(Array2::zeros((7, 8))).is_err());
        assert!(Patch::new(Array2::from_elem((8, 8), 1.5)).is_err());
        assert!(extract_patch(&Array2::zeros((0, 0)), (0.0, 0.0), (8, 8)).is_err());
    }

    #[test]
    fn grayscale_coefficients() {
        let mut img = Array3::zeros((1, 3, 3));
        img[[0, 0, 0]] = 1.0;
        img[[0, 0, 1]] = 1.0;
        img[[0, 0, 2]] = 1.0;
        img[[0, 1, 1]] = 1.0;
        img[[0, 2, 0]] = 0.2;
        img[[0, 2, 1]] = 0.4;
        img[[0, 2, 2]] = 0.9;
        let g = to_grayscale(&img).unwrap();
        assert!((g[[0, 0]] - 1.0).abs() < 1e-12);
        assert_eq!(g[[0, 1]], 0.587);
        assert!((g[[0, 2]] - (0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.9)).abs() < 1e-15);

        let one = Array3::from_elem((2, 2, 1), 0.3);
        assert_eq!(to_grayscale(&one).unwrap(), Array2::from_elem((2, 2), 0.3));
        assert!(to_grayscale(&Array3::zeros((2, 2, 4))).is_err());
    }

    #[test]
    fn window_removes_mean() {
        let p = Array2::from_elem((8, 8), 0.7);
        let w = Envelope::Cosine.window((8, 8)).unwrap();
        let out = apply_window(p.view(), &w).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-15));
    }
}
