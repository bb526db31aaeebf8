//! Correlation filter training and detection: the linear and kernelized
//! translation filters and the 1D rotation filter over orientation
//! descriptors.

mod kernel;
mod rotation;
mod translation;

pub use kernel::{
    gaussian_kernel_correlation, kernel_correlation, kernel_correlation_1d,
    linear_kernel_correlation, Kernel,
};
pub use rotation::{
    detect_rotation_correlation, detect_rotation_filter, detect_rotation_maxshift,
    parabolic_offset, train_rotation_filter, wrap_angle, RotationEstimate, RotationFilterModel,
};
pub use translation::{
    detect_translation, train_kernel_cf, train_linear_cf, update_model, FeatureMap,
    KernelDualModel, LinearFilterModel, TranslationDetection, TranslationModel,
};
