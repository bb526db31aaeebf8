//! Patch rotation and the matching displacement rotation.
//!
//! Angles are in degrees. A positive angle turns the `+col` axis toward the
//! `+row` axis, i.e. counter-clockwise in `(x = col, y = row)` coordinates
//! (clockwise as seen on a screen with rows growing downward).

use ndarray::Array2;

use super::Patch;

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(theta: f64) -> (f64, f64) {
    let t = theta.rem_euclid(360.0);
    if t == 0.0 {
        (0.0, 1.0)
    } else if t == 90.0 {
        (1.0, 0.0)
    } else if t == 180.0 {
        (0.0, -1.0)
    } else if t == 270.0 {
        (-1.0, 0.0)
    } else {
        theta.to_radians().sin_cos()
    }
}

fn bilinear_clamped(src: &Array2<f64>, y: f64, x: f64) -> f64 {
    let (m, n) = src.dim();
    let y = y.clamp(0.0, (m - 1) as f64);
    let x = x.clamp(0.0, (n - 1) as f64);
    let y0 = y.floor() as usize;
    let x0 = x.floor() as usize;
    let y1 = (y0 + 1).min(m - 1);
    let x1 = (x0 + 1).min(n - 1);
    let fy = y - y0 as f64;
    let fx = x - x0 as f64;
    let top = src[[y0, x0]] * (1.0 - fx) + src[[y0, x1]] * fx;
    let bottom = src[[y1, x0]] * (1.0 - fx) + src[[y1, x1]] * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Rotates a grid about its geometric center with bilinear sampling;
/// samples outside the source replicate the nearest edge.
pub fn rotate_grid(src: &Array2<f64>, theta: f64) -> Array2<f64> {
    if theta == 0.0 {
        return src.clone();
    }
    let (m, n) = src.dim();
    let (s, c) = sin_cos_deg(theta);
    let (cy, cx) = ((m as f64 - 1.0) / 2.0, (n as f64 - 1.0) / 2.0);
    Array2::from_shape_fn((m, n), |(i, j)| {
        let (dy, dx) = (i as f64 - cy, j as f64 - cx);
        // inverse map: destination offset rotated by -theta
        let sx = c * dx + s * dy + cx;
        let sy = -s * dx + c * dy + cy;
        bilinear_clamped(src, sy, sx)
    })
}

pub fn rotate_patch(patch: &Patch, theta: f64) -> Patch {
    let pixels = rotate_grid(patch.pixels(), theta);
    Patch {
        pixels,
        frame_index: patch.frame_index,
        center: patch.center,
    }
}

/// Rotates a `(dy, dx)` displacement with the same convention as
/// [`rotate_patch`]: content at offset `d` from the center moves to
/// `rotate_displacement(d, theta)`.
pub fn rotate_displacement(d: (f64, f64), theta: f64) -> (f64, f64) {
    let (dy, dx) = d;
    let (s, c) = sin_cos_deg(theta);
    (dx * s + dy * c, dx * c - dy * s)
}
