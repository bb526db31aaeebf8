//! Orientation histograms: the single-cell global descriptor used for
//! rotation estimation, and a cell-grid variant used as translation
//! feature channels.

use ndarray::{Array1, Array2, Array3, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrientationMode {
    /// Orientations folded to `[0°, 180°)`.
    Unsigned180,
    /// Orientations kept in `[0°, 360°)`.
    Signed360,
}

impl OrientationMode {
    pub fn span_deg(self) -> f64 {
        match self {
            OrientationMode::Unsigned180 => 180.0,
            OrientationMode::Signed360 => 360.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OrientationMode::Unsigned180 => "unsigned180",
            OrientationMode::Signed360 => "signed360",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unsigned180" => Some(OrientationMode::Unsigned180),
            "signed360" => Some(OrientationMode::Signed360),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HogConfig {
    pub bins: usize,
    pub mode: OrientationMode,
    /// Circular 5-tap binomial smoothing of the histogram.
    pub smoothing: bool,
}

impl Default for HogConfig {
    fn default() -> Self {
        HogConfig {
            bins: 90,
            mode: OrientationMode::Unsigned180,
            smoothing: true,
        }
    }
}

pub const MIN_BINS: usize = 8;

/// Circular histogram of gradient orientations over a whole patch. Bin `k`
/// covers `[k·Δ, (k+1)·Δ)`; rotating the patch by `θ` shifts the histogram
/// by roughly `θ/Δ` bins.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationDescriptor {
    bins: Array1<f64>,
    mode: OrientationMode,
    degenerate: bool,
}

impl OrientationDescriptor {
    /// Builds a descriptor from raw (non-negative) bin values, L2-normalizing them.
    pub fn from_bins(bins: Array1<f64>, mode: OrientationMode) -> Result<Self> {
        if bins.len() < MIN_BINS {
            return Err(Error::param(
                "bins",
                format!("need >= {MIN_BINS}, got {}", bins.len()),
            ));
        }
        if bins.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param(
                "bins",
                "values must be finite and non-negative",
            ));
        }
        let norm = bins.dot(&bins).sqrt();
        if norm <= 1e-12 {
            return Ok(OrientationDescriptor {
                bins: Array1::zeros(bins.len()),
                mode,
                degenerate: true,
            });
        }
        Ok(OrientationDescriptor {
            bins: bins / norm,
            mode,
            degenerate: false,
        })
    }

    pub fn bins(&self) -> &Array1<f64> {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn mode(&self) -> OrientationMode {
        self.mode
    }

    pub fn bin_width(&self) -> f64 {
        self.mode.span_deg() / self.bins.len() as f64
    }

    /// True for the all-zero descriptor of a constant patch.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Circular shift by `k` bins: `out[i] = in[i - k]`.
    pub fn shifted(&self, k: isize) -> Self {
        let b = self.bins.len() as isize;
        let bins = Array1::from_shape_fn(self.bins.len(), |i| {
            self.bins[(i as isize - k).rem_euclid(b) as usize]
        });
        OrientationDescriptor {
            bins,
            mode: self.mode,
            degenerate: self.degenerate,
        }
    }

    /// Elementwise blend `(1-eta)·self + eta·other`, renormalized.
    pub fn interpolate(&self, other: &Self, eta: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::shape(&[self.len()], &[other.len()]));
        }
        let mixed = &self.bins * (1.0 - eta) + &other.bins * eta;
        Self::from_bins(mixed, self.mode)
    }
}

/// Centered `[-1, 0, 1]` differences with edge clamping.
/// Returns `(gy, gx)` with `gy` along rows and `gx` along columns.
pub(crate) fn gradients(img: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (m, n) = img.dim();
    let gy = Array2::from_shape_fn((m, n), |(r, c)| {
        img[[(r + 1).min(m - 1), c]] - img[[r.saturating_sub(1), c]]
    });
    let gx = Array2::from_shape_fn((m, n), |(r, c)| {
        img[[r, (c + 1).min(n - 1)]] - img[[r, c.saturating_sub(1)]]
    });
    (gy, gx)
}

/// Orientation of a gradient in degrees, folded into `[0, span)`.
fn orientation_deg(gy: f64, gx: f64, span: f64) -> f64 {
    let o = gy.atan2(gx).to_degrees().rem_euclid(span);
    // rem_euclid can round up to exactly `span`
    if o >= span {
        0.0
    } else {
        o
    }
}

fn vote(hist: &mut [f64], orientation: f64, magnitude: f64, bin_width: f64) {
    let b = hist.len();
    let pos = orientation / bin_width;
    let lo = pos.floor();
    let frac = pos - lo;
    let lo = (lo as usize) % b;
    hist[lo] += magnitude * (1.0 - frac);
    hist[(lo + 1) % b] += magnitude * frac;
}

const BINOMIAL5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

fn smooth_circular(hist: &[f64]) -> Vec<f64> {
    let b = hist.len() as isize;
    (0..b)
        .map(|i| {
            BINOMIAL5
                .iter()
                .enumerate()
                .map(|(t, w)| w * hist[(i + t as isize - 2).rem_euclid(b) as usize])
                .sum()
        })
        .collect()
}

/// Global orientation histogram of an (already windowed) patch.
///
/// Each pixel votes its gradient magnitude into the two circularly adjacent
/// bins around its orientation, linearly weighted. The result is optionally
/// smoothed and then L2-normalized. A patch without gradients yields the
/// flagged all-zero descriptor.
pub fn global_hog(windowed: ArrayView2<f64>, config: &HogConfig) -> Result<OrientationDescriptor> {
    if config.bins < MIN_BINS {
        return Err(Error::param(
            "bins",
            format!("need >= {MIN_BINS}, got {}", config.bins),
        ));
    }
    let (m, n) = windowed.dim();
    if m < 3 || n < 3 {
        return Err(Error::Degenerate(format!(
            "patch {m}x{n} too small for gradients"
        )));
    }
    let span = config.mode.span_deg();
    let width = span / config.bins as f64;
    let (gy, gx) = gradients(windowed);
    let mut hist = vec![0.0; config.bins];
    for (&dy, &dx) in gy.iter().zip(gx.iter()) {
        let mag = dy.hypot(dx);
        if mag > 0.0 {
            vote(&mut hist, orientation_deg(dy, dx, span), mag, width);
        }
    }
    if config.smoothing {
        hist = smooth_circular(&hist);
    }
    OrientationDescriptor::from_bins(Array1::from(hist), config.mode)
}

/// Cell-grid histogram of unsigned orientations, shaped
/// `(orientations, m / cell, n / cell)`.
///
/// Each cell histogram is L2-normalized, clipped at 0.2 and renormalized.
pub fn cell_hog(img: ArrayView2<f64>, cell: usize, orientations: usize) -> Result<Array3<f64>> {
    if cell == 0 || orientations < 2 {
        return Err(Error::param(
            "cell_hog",
            "cell >= 1 and orientations >= 2 required",
        ));
    }
    let (m, n) = img.dim();
    let (cr, cc) = (m / cell, n / cell);
    if cr == 0 || cc == 0 {
        return Err(Error::Degenerate(format!(
            "patch {m}x{n} smaller than one {cell}px cell"
        )));
    }
    let (gy, gx) = gradients(img);
    let width = 180.0 / orientations as f64;
    let mut out = Array3::<f64>::zeros((orientations, cr, cc));
    let mut hist = vec![0.0; orientations];
    for r in 0..cr {
        for c in 0..cc {
            hist.iter_mut().for_each(|h| *h = 0.0);
            for i in r * cell..(r + 1) * cell {
                for j in c * cell..(c + 1) * cell {
                    let (dy, dx) = (gy[[i, j]], gx[[i, j]]);
                    let mag = dy.hypot(dx);
                    if mag > 0.0 {
                        vote(&mut hist, orientation_deg(dy, dx, 180.0), mag, width);
                    }
                }
            }
            let norm = (hist.iter().map(|v| v * v).sum::<f64>() + 1e-6).sqrt();
            hist.iter_mut().for_each(|h| *h = (*h / norm).min(0.2));
            let norm = (hist.iter().map(|v| v * v).sum::<f64>() + 1e-6).sqrt();
            for (o, h) in hist.iter().enumerate() {
                out[[o, r, c]] = h / norm;
            }
        }
    }
    Ok(out)
}
