//! Procedural test sequences with exact ground truth.
//!
//! A striped rectangular target moves over a cluttered background and
//! rotates about its own center according to an analytic schedule.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::features::sin_cos_deg;
use crate::tracker::{BBox, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Translate,
    Rotate,
    TranslateRotate,
}

impl SynthKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "translate" => Some(SynthKind::Translate),
            "rotate" => Some(SynthKind::Rotate),
            "translate_rotate" => Some(SynthKind::TranslateRotate),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Translate => "translate",
            SynthKind::Rotate => "rotate",
            SynthKind::TranslateRotate => "translate_rotate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// `(rows, cols)`.
    pub frame_size: (usize, usize),
    /// Unrotated target `(h, w)`.
    pub target_size: (f64, f64),
    /// Per-frame `(dy, dx)` motion for the translating kinds.
    pub velocity: (f64, f64),
    /// Constant per-frame rotation of the `rotate` kind, degrees.
    pub rotation_step: f64,
    /// Swing of the `translate_rotate` kind: the target alternates between
    /// two orientations this far apart, so per-frame rotations have this
    /// standard deviation.
    pub rotation_swing: f64,
    /// Standard deviation of the orientation jitter, degrees.
    pub rotation_jitter: f64,
    /// Standard deviation of additive pixel noise.
    pub noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            frame_size: (160, 160),
            target_size: (44.0, 28.0),
            velocity: (1.5, 1.0),
            rotation_step: 5.0,
            rotation_swing: 25.0,
            rotation_jitter: 2.0,
            noise: 0.0,
        }
    }
}

/// A generated sequence together with its true orientation schedule.
#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub sequence: Sequence,
    /// Absolute target orientation per frame, degrees.
    pub orientations: Vec<f64>,
}

impl SyntheticSequence {
    /// Frame-to-frame rotations (`frames - 1` values).
    pub fn rotation_increments(&self) -> Vec<f64> {
        self.orientations.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

struct Wave {
    amplitude: f64,
    /// Spatial frequency along (x, y), radians per pixel.
    k: (f64, f64),
    phase: f64,
}

impl Wave {
    fn random(rng: &mut ChaCha8Rng, amplitude: f64, period: (f64, f64)) -> Self {
        let angle = rng.random_range(0.0..PI);
        let p = rng.random_range(period.0..period.1);
        let f = 2.0 * PI / p;
        Wave {
            amplitude,
            k: (f * angle.cos(), f * angle.sin()),
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        self.amplitude * (self.k.0 * x + self.k.1 * y + self.phase).cos()
    }
}

struct Scene {
    background: Vec<Wave>,
    /// Period of the grating that runs along the target's long axis.
    grating_period: f64,
    grating_phase: f64,
    /// Cross bar position along the long axis, as a fraction of the half length.
    bar_offset: f64,
    target_size: (f64, f64),
}

impl Scene {
    fn new(rng: &mut ChaCha8Rng, target_size: (f64, f64)) -> Self {
        let background = (0..4)
            .map(|_| Wave::random(rng, 0.05, (14.0, 40.0)))
            .collect();
        Scene {
            background,
            grating_period: rng.random_range(7.0..9.0),
            grating_phase: rng.random_range(0.0..2.0 * PI),
            bar_offset: rng.random_range(-0.3..0.3),
            target_size,
        }
    }

    /// Renders one frame with the target at `center`, rotated by `orientation`.
    ///
    /// The target is a rectangle carrying a grating parallel to its long
    /// axis, with a dark cross bar and a bright corner block so that it has
    /// no rotational symmetry.
    fn render(&self, size: (usize, usize), center: (f64, f64), orientation: f64) -> Array2<f64> {
        let (s, c) = sin_cos_deg(orientation);
        let (hw, hh) = (self.target_size.1 / 2.0, self.target_size.0 / 2.0);
        let soft = |d: f64| 0.5 * (1.0 - (d / 0.75).tanh());
        Array2::from_shape_fn(size, |(r, col)| {
            let (x, y) = (col as f64 + 0.5, r as f64 + 0.5);
            let bg = 0.4 + self.background.iter().map(|w| w.at(x, y)).sum::<f64>();
            // target-local coordinates (inverse rotation about the center)
            let (dx, dy) = (x - center.1, y - center.0);
            let lx = c * dx + s * dy;
            let ly = -s * dx + c * dy;
            let mask = soft(lx.abs() - hw) * soft(ly.abs() - hh);
            if mask < 1e-6 {
                return bg.clamp(0.0, 1.0);
            }
            let grating = 0.22 * (2.0 * PI * lx / self.grating_period + self.grating_phase).cos();
            let bar = -0.3 * soft((ly - self.bar_offset * hh).abs() - 2.0);
            let block = 0.3
                * soft((lx - 0.5 * hw).abs() - 0.4 * hw)
                * soft((ly + 0.7 * hh).abs() - 0.25 * hh);
            let tex = 0.6 + grating + bar + block;
            (bg * (1.0 - mask) + tex * mask).clamp(0.0, 1.0)
        })
    }
}

/// Generates a deterministic sequence of `kind`.
pub fn generate_synthetic_sequence(
    kind: SynthKind,
    frames: usize,
    params: &SynthParams,
    seed: u64,
) -> Result<SyntheticSequence> {
    if frames < 2 {
        return Err(Error::param("frames", "need at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = Scene::new(&mut rng, params.target_size);
    let jitter = Normal::new(0.0, params.rotation_jitter.max(0.0))
        .map_err(|e| Error::param("rotation_jitter", e.to_string()))?;
    let noise = Normal::new(0.0, params.noise.max(0.0))
        .map_err(|e| Error::param("noise", e.to_string()))?;

    let (rows, cols) = params.frame_size;
    let mid = (rows as f64 / 2.0, cols as f64 / 2.0);
    let travel = (frames - 1) as f64 / 2.0;
    let mut orientations = Vec::with_capacity(frames);
    let mut centers = Vec::with_capacity(frames);
    for i in 0..frames {
        let t = i as f64;
        let (center, orientation) = match kind {
            SynthKind::Translate => (
                (
                    mid.0 + params.velocity.0 * (t - travel),
                    mid.1 + params.velocity.1 * (t - travel),
                ),
                0.0,
            ),
            SynthKind::Rotate => (mid, params.rotation_step * t),
            SynthKind::TranslateRotate => {
                let base = if i % 2 == 1 {
                    params.rotation_swing
                } else {
                    0.0
                };
                let o = if i == 0 {
                    0.0
                } else {
                    base + jitter.sample(&mut rng)
                };
                (
                    (
                        mid.0 + params.velocity.0 * (t - travel),
                        mid.1 + params.velocity.1 * (t - travel),
                    ),
                    o,
                )
            }
        };
        centers.push(center);
        orientations.push(orientation);
    }

    let mut frames_out = Vec::with_capacity(frames);
    for (center, &o) in centers.iter().zip(&orientations) {
        let mut img = scene.render(params.frame_size, *center, o);
        if params.noise > 0.0 {
            img.mapv_inplace(|v| (v + noise.sample(&mut rng)).clamp(0.0, 1.0));
        }
        frames_out.push(img);
    }
    let ground_truth = centers
        .iter()
        .map(|&c| BBox::from_center(c, params.target_size))
        .collect();
    Ok(SyntheticSequence {
        sequence: Sequence {
            name: format!("synthetic_{}_{seed}", kind.name()),
            frames: frames_out,
            ground_truth: Some(ground_truth),
        },
        orientations,
    })
}
