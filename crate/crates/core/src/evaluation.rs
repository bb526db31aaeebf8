//! Rotation-detection benchmark and tracking metrics.
//!
//! The benchmark rotates each source image by random angles and asks every
//! estimator for the rotation between the upright and rotated patch, given
//! only their orientation descriptors. Tracking metrics cover the center-error
//! precision curve, the spread of per-frame rotations and the fraction of
//! frames where the rotated detection won.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{
    apply_window, global_hog, rotate_grid, sin_cos_deg, Envelope, HogConfig, OrientationMode,
    MIN_PATCH_SIDE,
};
use crate::models::{
    detect_rotation_correlation, detect_rotation_filter, detect_rotation_maxshift,
    train_rotation_filter, wrap_angle, Kernel,
};
use crate::spectral::gaussian_target_1d;
use crate::tracker::{run_sequence, FrameRecord, RotationMethod, Sequence, TrackerConfig};

/// Largest center-error threshold of the precision curve, pixels.
pub const PRECISION_MAX_THRESHOLD: usize = 50;
pub const PRECISION_REPORT_THRESHOLD: usize = 20;

/// Side of the square patch cut from benchmark sources.
pub const BENCH_PATCH_SIDE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RotationBenchSpec {
    /// Square-ish source images. The patch is the central square of side
    /// `min(rows, cols) / 1.5`, so rotated crops never sample outside.
    pub images: Vec<Array2<f64>>,
    pub rotations_per_image: usize,
    /// Open interval of sampled angles, degrees.
    pub angle_range: (f64, f64),
    pub envelopes: Vec<Envelope>,
    pub methods: Vec<RotationMethod>,
    pub b: usize,
    pub orientation_mode: OrientationMode,
    pub lambda2: f64,
    pub rotation_sigma_factor: f64,
    pub refinement: bool,
    pub seed: u64,
}

impl RotationBenchSpec {
    /// Benchmark over `images` with the tracker's default rotation settings.
    pub fn new(images: Vec<Array2<f64>>, rotations_per_image: usize, seed: u64) -> Self {
        let cfg = TrackerConfig::default();
        RotationBenchSpec {
            images,
            rotations_per_image,
            angle_range: (-80.0, 80.0),
            envelopes: vec![Envelope::Cosine, Envelope::Gaussian],
            methods: vec![
                RotationMethod::Filter,
                RotationMethod::Correlation,
                RotationMethod::MaxShift,
            ],
            b: cfg.b,
            orientation_mode: cfg.orientation_mode,
            lambda2: cfg.lambda2,
            rotation_sigma_factor: cfg.rotation_sigma_factor,
            refinement: cfg.refinement,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.rotations_per_image == 0 {
            return Err(Error::param("rotations_per_image", "must be at least 1"));
        }
        if self.envelopes.is_empty() || self.methods.is_empty() {
            return Err(Error::param(
                "methods",
                "need at least one envelope and method",
            ));
        }
        if self.methods.contains(&RotationMethod::None) {
            return Err(Error::param(
                "methods",
                "`none` is not a rotation estimator",
            ));
        }
        let (lo, hi) = self.angle_range;
        let half = self.orientation_mode.span_deg() / 2.0;
        if !(lo <= hi && lo >= -half && hi <= half) {
            return Err(Error::param(
                "angle_range",
                format!("({lo}, {hi}) must lie within ±{half}°"),
            ));
        }
        if self.b < crate::features::MIN_BINS {
            return Err(Error::param("b", format!("must be >= 8, got {}", self.b)));
        }
        for img in &self.images {
            let side = img.nrows().min(img.ncols()) * 2 / 3;
            if side < MIN_PATCH_SIDE {
                return Err(Error::param(
                    "images",
                    format!("source {:?} too small", img.dim()),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub envelope: Envelope,
    pub method: RotationMethod,
    /// Mean absolute error, degrees.
    pub mae: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn mae(&self, envelope: Envelope, method: RotationMethod) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.envelope == envelope && r.method == method)
            .map(|r| r.mae)
    }

    /// One row per envelope, one column per method.
    pub fn format(&self) -> String {
        let mut envelopes: Vec<Envelope> = Vec::new();
        let mut methods: Vec<RotationMethod> = Vec::new();
        for r in &self.rows {
            if !envelopes.contains(&r.envelope) {
                envelopes.push(r.envelope);
            }
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
        }
        let mut out = format!("{:<10}", "envelope");
        for m in &methods {
            out += &format!("{:>14}", m.name());
        }
        out.push('\n');
        for e in &envelopes {
            out += &format!("{:<10}", e.name());
            for m in &methods {
                match self.mae(*e, *m) {
                    Some(v) => out += &format!("{v:>14.2}"),
                    None => out += &format!("{:>14}", "-"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn center_crop(img: &Array2<f64>, side: usize) -> Array2<f64> {
    let top = (img.nrows() - side) / 2;
    let left = (img.ncols() - side) / 2;
    img.slice(ndarray::s![top..top + side, left..left + side])
        .to_owned()
}

/// Runs every estimator on every (image, angle) pair and reports the mean
/// absolute angular error per envelope and method.
pub fn run_rotation_benchmark(spec: &RotationBenchSpec) -> Result<BenchTable> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.angle_range;
    let angles: Vec<Vec<f64>> = spec
        .images
        .iter()
        .map(|_| {
            (0..spec.rotations_per_image)
                .map(|_| {
                    if lo < hi {
                        rng.random_range(lo..hi)
                    } else {
                        lo
                    }
                })
                .collect()
        })
        .collect();

    let hog = HogConfig {
        bins: spec.b,
        mode: spec.orientation_mode,
        smoothing: true,
    };
    let span = spec.orientation_mode.span_deg();
    let target = gaussian_target_1d(spec.b, spec.b as f64 * spec.rotation_sigma_factor)?;
    let cells = spec.envelopes.len() * spec.methods.len();

    // errors[image][envelope * methods + method] = per-angle absolute errors
    let per_image: Vec<Vec<Vec<f64>>> = spec
        .images
        .par_iter()
        .zip(angles.par_iter())
        .map(|(img, thetas)| -> Result<Vec<Vec<f64>>> {
            let side = img.nrows().min(img.ncols()) * 2 / 3;
            let upright = center_crop(img, side);
            let rotated: Vec<Array2<f64>> = thetas
                .iter()
                .map(|&t| center_crop(&rotate_grid(img, t), side))
                .collect();
            let mut errors = vec![Vec::with_capacity(thetas.len()); cells];
            for (ei, env) in spec.envelopes.iter().enumerate() {
                let window = env.window((side, side))?;
                let a_old = global_hog(apply_window(upright.view(), &window)?.view(), &hog)?;
                let filter = train_rotation_filter(&a_old, &target, spec.lambda2, Kernel::Linear)?;
                for (rot, &truth) in rotated.iter().zip(thetas) {
                    let a_new = global_hog(apply_window(rot.view(), &window)?.view(), &hog)?;
                    for (mi, method) in spec.methods.iter().enumerate() {
                        let est = match method {
                            RotationMethod::Filter => {
                                detect_rotation_filter(&filter, &a_new, spec.refinement)?
                            }
                            RotationMethod::Correlation => {
                                detect_rotation_correlation(&a_old, &a_new, spec.refinement)?
                            }
                            RotationMethod::MaxShift => detect_rotation_maxshift(&a_old, &a_new)?,
                            RotationMethod::None => unreachable!("rejected by validate"),
                        };
                        errors[ei * spec.methods.len() + mi]
                            .push(wrap_angle(est.theta_deg - truth, span).abs());
                    }
                }
            }
            Ok(errors)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cells);
    for (ei, env) in spec.envelopes.iter().enumerate() {
        for (mi, method) in spec.methods.iter().enumerate() {
            let idx = ei * spec.methods.len() + mi;
            // accumulate in image order so the sum does not depend on scheduling
            let (sum, n) = per_image
                .iter()
                .flat_map(|e| e[idx].iter())
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            rows.push(BenchRow {
                envelope: *env,
                method: *method,
                mae: sum / n as f64,
                trials: n,
            });
        }
    }
    Ok(BenchTable { rows })
}

/// Procedural benchmark texture `index` for `seed`, cycling through oriented
/// gratings, polygon composites and orientation-biased noise. Values lie in
/// `[0, 1]`.
pub fn synthetic_texture(index: usize, seed: u64, side: usize) -> Array2<f64> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index as u64);
    let c = side as f64 / 2.0;
    let raw = match index % 3 {
        0 => {
            let waves: Vec<(f64, f64, f64, f64)> = (0..3)
                .map(|i| {
                    let angle = rng.random_range(0.0..PI);
                    let period = rng.random_range(6.0..18.0);
                    let amp = 1.0 / (1.0 + i as f64);
                    (
                        amp,
                        angle,
                        2.0 * PI / period,
                        rng.random_range(0.0..2.0 * PI),
                    )
                })
                .collect();
            Array2::from_shape_fn((side, side), |(r, col)| {
                let (x, y) = (col as f64 - c, r as f64 - c);
                waves
                    .iter()
                    .map(|&(a, ang, f, ph)| a * (f * (x * ang.cos() + y * ang.sin()) + ph).cos())
                    .sum()
            })
        }
        1 => {
            struct Rect {
                center: (f64, f64),
                half: (f64, f64),
                sin_cos: (f64, f64),
                value: f64,
            }
            let rects: Vec<Rect> = (0..rng.random_range(4..8))
                .map(|_| Rect {
                    center: (
                        rng.random_range(-0.4..0.4) * side as f64,
                        rng.random_range(-0.4..0.4) * side as f64,
                    ),
                    half: (
                        rng.random_range(3.0..0.25 * side as f64),
                        rng.random_range(2.0..0.12 * side as f64),
                    ),
                    sin_cos: sin_cos_deg(rng.random_range(0.0..180.0)),
                    value: rng.random_range(-1.0..1.0),
                })
                .collect();
            Array2::from_shape_fn((side, side), |(r, col)| {
                let (x, y) = (col as f64 - c, r as f64 - c);
                rects
                    .iter()
                    .map(|rc| {
                        let (dx, dy) = (x - rc.center.1, y - rc.center.0);
                        let (s, co) = rc.sin_cos;
                        let u = co * dx + s * dy;
                        let v = -s * dx + co * dy;
                        let inside = |d: f64| 0.5 * (1.0 - d.tanh());
                        rc.value * inside(u.abs() - rc.half.0) * inside(v.abs() - rc.half.1)
                    })
                    .sum()
            })
        }
        _ => {
            let dominant = rng.random_range(0.0..PI);
            let waves: Vec<(f64, f64, f64, f64)> = (0..24)
                .map(|_| {
                    let angle = dominant + rng.random_range(-0.35..0.35);
                    let period = rng.random_range(5.0..20.0);
                    (
                        rng.random_range(0.2..1.0),
                        angle,
                        2.0 * PI / period,
                        rng.random_range(0.0..2.0 * PI),
                    )
                })
                .collect();
            Array2::from_shape_fn((side, side), |(r, col)| {
                let (x, y) = (col as f64 - c, r as f64 - c);
                waves
                    .iter()
                    .map(|&(a, ang, f, ph)| a * (f * (x * ang.cos() + y * ang.sin()) + ph).cos())
                    .sum()
            })
        }
    };
    let (min, max) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = (max - min).max(1e-12);
    raw.mapv(|v| (v - min) / range)
}

/// `count` benchmark sources sized for [`BENCH_PATCH_SIDE`] patches.
pub fn synthetic_bench_images(count: usize, seed: u64) -> Vec<Array2<f64>> {
    let side = BENCH_PATCH_SIDE * 3 / 2;
    (0..count)
        .map(|i| synthetic_texture(i, seed, side))
        .collect()
}

/// Fraction of frames with center error at most `τ`, for `τ = 0..=50` px.
pub fn precision_curve(center_errors: &[f64]) -> Result<Vec<f64>> {
    if center_errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = center_errors.len() as f64;
    Ok((0..=PRECISION_MAX_THRESHOLD)
        .map(|t| center_errors.iter().filter(|&&e| e <= t as f64).count() as f64 / n)
        .collect())
}

/// Center errors of all records; fails when any record lacks ground truth.
pub fn center_errors(records: &[FrameRecord]) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            r.center_error.ok_or_else(|| {
                Error::param(
                    "records",
                    format!("frame {} has no ground truth", r.frame_index),
                )
            })
        })
        .collect()
}

/// Rotational difficulty: population standard deviation of per-frame
/// rotations, degrees.
pub fn compute_mho(thetas: &[f64]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = thetas.len() as f64;
    let mean = thetas.iter().sum::<f64>() / n;
    Ok((thetas.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// Fraction of frames whose final displacement came from the rotated patch.
pub fn compute_success_rate(records: &[FrameRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let s = records.iter().filter(|r| r.used_rotation).count();
    Ok(s as f64 / records.len() as f64)
}

/// Summary of one tracking run. Fields that do not apply are `None`: the
/// precision fields without ground truth, the rotation fields when the
/// rotation branch was disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub precision_curve: Option<Vec<f64>>,
    pub precision_at_20: Option<f64>,
    pub mean_center_error: Option<f64>,
    pub mho_deg: Option<f64>,
    pub success_rate: Option<f64>,
}

impl MetricsReport {
    pub fn from_records(records: &[FrameRecord], rotation_enabled: bool) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (curve, mean) = if records.iter().all(|r| r.center_error.is_some()) {
            let errors = center_errors(records)?;
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            (Some(precision_curve(&errors)?), Some(mean))
        } else {
            (None, None)
        };
        let (mho, rate) = if rotation_enabled {
            let thetas: Vec<f64> = records.iter().map(|r| r.theta_deg).collect();
            (
                Some(compute_mho(&thetas)?),
                Some(compute_success_rate(records)?),
            )
        } else {
            (None, None)
        };
        Ok(MetricsReport {
            precision_at_20: curve.as_ref().map(|c| c[PRECISION_REPORT_THRESHOLD]),
            precision_curve: curve,
            mean_center_error: mean,
            mho_deg: mho,
            success_rate: rate,
        })
    }
}

/// Paired baseline and rotation-aware runs over one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline_records: Vec<FrameRecord>,
    pub rkcf_records: Vec<FrameRecord>,
    pub baseline: MetricsReport,
    pub rkcf: MetricsReport,
    /// RKCF minus baseline precision per threshold.
    pub precision_difference: Vec<f64>,
}

/// Runs the sequence with the rotation branch disabled and enabled.
pub fn compare_trackers(sequence: &Sequence, config: &TrackerConfig) -> Result<Comparison> {
    if sequence.ground_truth.is_none() {
        return Err(Error::param("sequence", "comparison needs ground truth"));
    }
    let rkcf_config = if config.rotation_method == RotationMethod::None {
        TrackerConfig {
            rotation_method: RotationMethod::Filter,
            ..config.clone()
        }
    } else {
        config.clone()
    };
    let baseline_records = run_sequence(sequence, &config.baseline(), None)?;
    let rkcf_records = run_sequence(sequence, &rkcf_config, None)?;
    compare_records(baseline_records, rkcf_records)
}

/// Builds a [`Comparison`] from already-tracked record sets.
pub fn compare_records(
    baseline_records: Vec<FrameRecord>,
    rkcf_records: Vec<FrameRecord>,
) -> Result<Comparison> {
    let baseline = MetricsReport::from_records(&baseline_records, false)?;
    let rkcf = MetricsReport::from_records(&rkcf_records, true)?;
    let (Some(b), Some(r)) = (&baseline.precision_curve, &rkcf.precision_curve) else {
        return Err(Error::param("records", "comparison needs ground truth"));
    };
    let precision_difference = r.iter().zip(b).map(|(r, b)| r - b).collect();
    Ok(Comparison {
        baseline_records,
        rkcf_records,
        baseline,
        rkcf,
        precision_difference,
    })
}
