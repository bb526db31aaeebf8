//! Rotation-aware kernelized correlation filter tracking.
//!
//! A kernelized correlation filter locates the target by translation. A
//! second, one-dimensional correlation filter over a global histogram of
//! gradient orientations estimates the in-plane rotation between frames, and
//! the tracker keeps the translation found on the counter-rotated patch
//! whenever that detection responds more strongly.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evaluation;
pub mod features;
pub mod io;
pub mod models;
pub mod spectral;
pub mod tracker;

pub use error::{Error, Result};
