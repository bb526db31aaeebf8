//! Rotation-aware kernelized correlation filter tracker.
//!
//! Each frame runs the baseline translation filter, estimates the rotation
//! between the previous and current patch from their orientation
//! descriptors, re-runs the translation filter on the counter-rotated patch
//! and keeps whichever detection peaked higher.

use log::debug;
use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::features::{
    apply_window, cell_hog, extract_patch, global_hog, rotate_displacement, rotate_patch,
    HogConfig, OrientationDescriptor, OrientationMode, Patch,
};
use crate::models::{
    detect_rotation_correlation, detect_rotation_filter, detect_rotation_maxshift,
    detect_translation, train_kernel_cf, train_rotation_filter, update_model, FeatureMap, Kernel,
    KernelDualModel, RotationEstimate,
};
use crate::spectral::{cosine_window, gaussian_target_1d, gaussian_target_2d, TargetResponse};

pub const CELL_SIZE: usize = 4;
pub const CELL_ORIENTATIONS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotationMethod {
    /// Rotation branch disabled: plain kernelized correlation filter.
    None,
    Filter,
    Correlation,
    MaxShift,
}

impl RotationMethod {
    pub fn name(self) -> &'static str {
        match self {
            RotationMethod::None => "none",
            RotationMethod::Filter => "filter",
            RotationMethod::Correlation => "correlation",
            RotationMethod::MaxShift => "maxshift",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(RotationMethod::None),
            "filter" => Some(RotationMethod::Filter),
            "correlation" => Some(RotationMethod::Correlation),
            "maxshift" => Some(RotationMethod::MaxShift),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    /// Mean-removed, windowed grayscale.
    Gray,
    /// 4x4-pixel cells with 9 unsigned orientation channels.
    CellHog,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Gray => "gray",
            FeatureMode::CellHog => "cellhog",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gray" => Some(FeatureMode::Gray),
            "cellhog" => Some(FeatureMode::CellHog),
            _ => None,
        }
    }

    pub fn cell_size(self) -> usize {
        match self {
            FeatureMode::Gray => 1,
            FeatureMode::CellHog => CELL_SIZE,
        }
    }

    /// Gaussian kernel bandwidth used when none is configured explicitly.
    pub fn default_kernel_sigma(self) -> f64 {
        match self {
            FeatureMode::Gray => 0.5,
            FeatureMode::CellHog => 0.6,
        }
    }
}

/// Every tunable of the tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Search window size relative to the target size.
    pub padding: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Gaussian kernel bandwidth of the translation filter.
    pub kernel_sigma: f64,
    /// 2D target bandwidth as a fraction of `sqrt(target area)`.
    pub target_sigma_factor: f64,
    /// 1D rotation target bandwidth as a fraction of `b`.
    pub rotation_sigma_factor: f64,
    /// Orientation histogram bin count.
    pub b: usize,
    pub orientation_mode: OrientationMode,
    pub eta: f64,
    pub rotation_method: RotationMethod,
    /// Parabolic sub-bin refinement of rotation peaks.
    pub refinement: bool,
    pub feature_mode: FeatureMode,
    /// Kernel of the rotation filter dual form; `None` means linear.
    pub rotation_kernel_sigma: Option<f64>,
    pub descriptor_smoothing: bool,
    /// Interpolation rate of the descriptor the rotation filter trains on;
    /// 0 trains on the previous frame only.
    pub descriptor_eta: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            padding: 1.5,
            lambda1: 1e-4,
            lambda2: 1e-4,
            kernel_sigma: FeatureMode::Gray.default_kernel_sigma(),
            target_sigma_factor: 0.1,
            rotation_sigma_factor: 1.0 / 16.0,
            b: 90,
            orientation_mode: OrientationMode::Unsigned180,
            eta: 0.02,
            rotation_method: RotationMethod::Filter,
            refinement: true,
            feature_mode: FeatureMode::Gray,
            rotation_kernel_sigma: None,
            descriptor_smoothing: true,
            descriptor_eta: 0.0,
        }
    }
}

impl TrackerConfig {
    pub fn baseline(&self) -> Self {
        TrackerConfig {
            rotation_method: RotationMethod::None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.padding > 1.0) {
            return Err(Error::param(
                "padding",
                format!("must exceed 1, got {}", self.padding),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::param(
                "eta",
                format!("must lie in [0, 1], got {}", self.eta),
            ));
        }
        if !(0.0..=1.0).contains(&self.descriptor_eta) {
            return Err(Error::param("descriptor_eta", "must lie in [0, 1]"));
        }
        if self.b < crate::features::MIN_BINS {
            return Err(Error::param("b", format!("must be >= 8, got {}", self.b)));
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("kernel_sigma", self.kernel_sigma),
            ("target_sigma_factor", self.target_sigma_factor),
            ("rotation_sigma_factor", self.rotation_sigma_factor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if let Some(s) = self.rotation_kernel_sigma {
            if !(s > 0.0) {
                return Err(Error::param("rotation_kernel_sigma", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn hog(&self) -> HogConfig {
        HogConfig {
            bins: self.b,
            mode: self.orientation_mode,
            smoothing: self.descriptor_smoothing,
        }
    }

    pub fn rotation_kernel(&self) -> Kernel {
        match self.rotation_kernel_sigma {
            None => Kernel::Linear,
            Some(sigma) => Kernel::Gaussian { sigma },
        }
    }
}

/// Axis-aligned box `(x, y, w, h)`: 0-indexed top-left corner in continuous
/// pixel coordinates, where pixel `i` covers `[i, i + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BBox { x, y, w, h }
    }

    /// `(row, col)` of the box center.
    pub fn center(&self) -> (f64, f64) {
        (self.y + self.h / 2.0, self.x + self.w / 2.0)
    }

    pub fn from_center(center: (f64, f64), size: (f64, f64)) -> Self {
        BBox {
            x: center.1 - size.1 / 2.0,
            y: center.0 - size.0 / 2.0,
            w: size.1,
            h: size.0,
        }
    }

    pub fn center_distance(&self, other: &BBox) -> f64 {
        let (a, b) = (self.center(), other.center());
        (a.0 - b.0).hypot(a.1 - b.1)
    }
}

/// Outputs of one tracked frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: usize,
    pub bbox: BBox,
    pub theta_deg: f64,
    /// Translation filter peak on the unrotated patch.
    pub peak_baseline: f64,
    /// Translation filter peak on the counter-rotated patch.
    pub peak_rotated: f64,
    pub used_rotation: bool,
    pub center_error: Option<f64>,
}

/// Per-sequence tracker state.
#[derive(Debug, Clone)]
pub struct TrackerState {
    pub center: (f64, f64),
    pub target_size: (f64, f64),
    pub window_size: (usize, usize),
    pub cf_model: KernelDualModel,
    pub prev_descriptor: Option<OrientationDescriptor>,
    pub theta_history: Vec<f64>,
    pub frame_index: usize,
    pub frame_dims: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    state: TrackerState,
    pixel_window: Array2<f64>,
    feature_window: Array2<f64>,
    target: TargetResponse<ndarray::Ix2>,
    rotation_target: TargetResponse<ndarray::Ix1>,
}

fn round_up_to(v: f64, multiple: usize) -> usize {
    let m = multiple as f64;
    ((v / m).ceil() as usize).max(1) * multiple
}

impl Tracker {
    /// Initializes on the first frame from the target box.
    pub fn new(frame: &Array2<f64>, bbox: BBox, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        let (rows, cols) = frame.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput);
        }
        if !(bbox.w > 0.0 && bbox.h > 0.0) {
            return Err(Error::Degenerate(format!(
                "box has non-positive size {}x{}",
                bbox.w, bbox.h
            )));
        }
        let center = bbox.center();
        if !(0.0..rows as f64).contains(&center.0) || !(0.0..cols as f64).contains(&center.1) {
            return Err(Error::Degenerate(format!(
                "box center {center:?} outside frame"
            )));
        }
        let cell = config.feature_mode.cell_size();
        // even number of feature cells per axis
        let window_size = (
            round_up_to(config.padding * bbox.h, 2 * cell)
                .max(crate::features::MIN_PATCH_SIDE.max(2 * cell)),
            round_up_to(config.padding * bbox.w, 2 * cell)
                .max(crate::features::MIN_PATCH_SIDE.max(2 * cell)),
        );
        let pixel_window = cosine_window(window_size)?;
        let feature_shape = (window_size.0 / cell, window_size.1 / cell);
        let feature_window = cosine_window(feature_shape)?;
        let sigma = config.target_sigma_factor * (bbox.w * bbox.h).sqrt() / cell as f64;
        let target = gaussian_target_2d(feature_shape, sigma)?;
        let rotation_target =
            gaussian_target_1d(config.b, config.b as f64 * config.rotation_sigma_factor)?;

        let mut tracker = Tracker {
            state: TrackerState {
                center,
                target_size: (bbox.h, bbox.w),
                window_size,
                // placeholder until the first model is trained below
                cf_model: KernelDualModel {
                    alpha_hat: Array2::zeros(feature_shape),
                    template: Array3::zeros((1, feature_shape.0, feature_shape.1)),
                    kernel: Kernel::Linear,
                    lambda1: config.lambda1,
                },
                prev_descriptor: None,
                theta_history: Vec::new(),
                frame_index: 0,
                frame_dims: (rows, cols),
            },
            config,
            pixel_window,
            feature_window,
            target,
            rotation_target,
        };
        let patch = tracker.patch(frame, center, 0)?;
        tracker.state.cf_model = tracker.train(&patch)?;
        if tracker.config.rotation_method != RotationMethod::None {
            tracker.state.prev_descriptor = Some(tracker.descriptor(&patch)?);
        }
        Ok(tracker)
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn state(&self) -> &TrackerState {
        &self.state
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_center(self.state.center, self.state.target_size)
    }

    fn patch(&self, frame: &Array2<f64>, center: (f64, f64), index: usize) -> Result<Patch> {
        let mut p = extract_patch(frame, center, self.state.window_size)?;
        p.frame_index = Some(index);
        Ok(p)
    }

    /// Translation features, scaled so the squared norm is a per-element mean.
    pub fn features(&self, patch: &Patch) -> Result<FeatureMap> {
        let mut feats = match self.config.feature_mode {
            FeatureMode::Gray => {
                let w = apply_window(patch.pixels().view(), &self.pixel_window)?;
                w.insert_axis(ndarray::Axis(0))
            }
            FeatureMode::CellHog => {
                let mut h = cell_hog(patch.pixels().view(), CELL_SIZE, CELL_ORIENTATIONS)?;
                for mut chan in h.outer_iter_mut() {
                    chan *= &self.feature_window;
                }
                h
            }
        };
        let scale = 1.0 / (feats.len() as f64).sqrt();
        feats *= scale;
        Ok(feats)
    }

    pub fn descriptor(&self, patch: &Patch) -> Result<OrientationDescriptor> {
        let windowed = apply_window(patch.pixels().view(), &self.pixel_window)?;
        global_hog(windowed.view(), &self.config.hog())
    }

    fn train(&self, patch: &Patch) -> Result<KernelDualModel> {
        let feats = self.features(patch)?;
        train_kernel_cf(
            &feats,
            &self.target,
            Kernel::Gaussian {
                sigma: self.config.kernel_sigma,
            },
            self.config.lambda1,
        )
    }

    fn estimate_rotation(&self, a_new: &OrientationDescriptor) -> Result<RotationEstimate> {
        let prev = self
            .state
            .prev_descriptor
            .as_ref()
            .expect("descriptor kept whenever rotation is enabled");
        let refine = self.config.refinement;
        match self.config.rotation_method {
            RotationMethod::Filter => {
                let model = train_rotation_filter(
                    prev,
                    &self.rotation_target,
                    self.config.lambda2,
                    self.config.rotation_kernel(),
                )?;
                detect_rotation_filter(&model, a_new, refine)
            }
            RotationMethod::Correlation => detect_rotation_correlation(prev, a_new, refine),
            RotationMethod::MaxShift => detect_rotation_maxshift(prev, a_new),
            RotationMethod::None => unreachable!("rotation branch disabled"),
        }
    }

    /// Processes the next frame.
    pub fn track_frame(&mut self, frame: &Array2<f64>) -> Result<FrameRecord> {
        if frame.dim() != self.state.frame_dims {
            let (r, c) = self.state.frame_dims;
            return Err(Error::shape(&[r, c], frame.shape()));
        }
        let index = self.state.frame_index + 1;
        let cell = self.config.feature_mode.cell_size() as f64;

        // baseline detection at the current center
        let patch = self.patch(frame, self.state.center, index)?;
        let base = detect_translation(&self.state.cf_model, &self.features(&patch)?)?;
        let peak_baseline = base.peak;
        let mut displacement = (base.dy as f64 * cell, base.dx as f64 * cell);
        let mut peak_rotated = peak_baseline;
        let mut used_rotation = false;
        let mut theta = 0.0;

        if self.config.rotation_method != RotationMethod::None {
            let a_new = self.descriptor(&patch)?;
            theta = self.estimate_rotation(&a_new)?.theta_deg;
            if theta != 0.0 {
                let counter = rotate_patch(&patch, -theta);
                let rot = detect_translation(&self.state.cf_model, &self.features(&counter)?)?;
                peak_rotated = rot.peak;
                if peak_rotated > peak_baseline {
                    used_rotation = true;
                    displacement =
                        rotate_displacement((rot.dy as f64 * cell, rot.dx as f64 * cell), theta);
                }
            }
        }
        debug!(
            "frame {index}: theta {theta:.2} U {peak_baseline:.4} rotated {peak_rotated:.4} used {used_rotation}"
        );

        self.state.center = (
            self.state.center.0 + displacement.0,
            self.state.center.1 + displacement.1,
        );

        // model update from the (unrotated) patch at the new center
        let patch = self.patch(frame, self.state.center, index)?;
        let fresh = self.train(&patch)?;
        self.state.cf_model = update_model(&self.state.cf_model, &fresh, self.config.eta)?;
        if self.config.rotation_method != RotationMethod::None {
            let a = self.descriptor(&patch)?;
            let next = match &self.state.prev_descriptor {
                Some(prev) if self.config.descriptor_eta > 0.0 => {
                    prev.interpolate(&a, self.config.descriptor_eta)?
                }
                _ => a,
            };
            self.state.prev_descriptor = Some(next);
        }
        self.state.theta_history.push(theta);
        self.state.frame_index = index;

        Ok(FrameRecord {
            frame_index: index,
            bbox: self.bbox(),
            theta_deg: theta,
            peak_baseline,
            peak_rotated,
            used_rotation,
            center_error: None,
        })
    }
}

/// Frames plus optional per-frame ground truth.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<Array2<f64>>,
    pub ground_truth: Option<Vec<BBox>>,
}

/// Tracks a whole sequence, initializing on frame 0 from `init` or the
/// first ground-truth box.
pub fn run_sequence(
    sequence: &Sequence,
    config: &TrackerConfig,
    init: Option<BBox>,
) -> Result<Vec<FrameRecord>> {
    if sequence.frames.len() < 2 {
        return Err(Error::param("sequence", "needs at least 2 frames"));
    }
    let gt = sequence.ground_truth.as_deref();
    let init = init
        .or_else(|| gt.and_then(|g| g.first().copied()))
        .ok_or_else(|| Error::param("init", "no initial box and no ground truth"))?;
    let mut tracker = Tracker::new(&sequence.frames[0], init, config.clone())?;
    let usable = gt.map_or(sequence.frames.len(), |g| {
        g.len().min(sequence.frames.len())
    });
    let mut records = Vec::with_capacity(usable - 1);
    for frame in &sequence.frames[1..usable] {
        let mut rec = tracker.track_frame(frame)?;
        if let Some(g) = gt {
            rec.center_error = Some(rec.bbox.center_distance(&g[rec.frame_index]));
        }
        records.push(rec);
    }
    Ok(records)
}
