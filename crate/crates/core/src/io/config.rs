//! Flat `key=value` tracker configuration.
//!
//! Keys are exactly the [`TrackerConfig`] field names. Blank lines and lines
//! starting with `#` are ignored. Keys that are not given keep their
//! defaults, except that `kernel_sigma` follows the feature mode when only
//! `feature_mode` is set.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::OrientationMode;
use crate::tracker::{FeatureMode, RotationMethod, TrackerConfig};

pub const CONFIG_KEYS: [&str; 15] = [
    "padding",
    "lambda1",
    "lambda2",
    "kernel_sigma",
    "target_sigma_factor",
    "rotation_sigma_factor",
    "b",
    "orientation_mode",
    "eta",
    "rotation_method",
    "refinement",
    "feature_mode",
    "rotation_kernel_sigma",
    "descriptor_smoothing",
    "descriptor_eta",
];

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a number, got `{v}`"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

/// Sets one field from its textual value.
pub fn apply_setting(
    cfg: &mut TrackerConfig,
    key: &str,
    value: &str,
) -> std::result::Result<(), String> {
    let v = value.trim();
    match key.trim() {
        "padding" => cfg.padding = parse_f64(v)?,
        "lambda1" => cfg.lambda1 = parse_f64(v)?,
        "lambda2" => cfg.lambda2 = parse_f64(v)?,
        "kernel_sigma" => cfg.kernel_sigma = parse_f64(v)?,
        "target_sigma_factor" => cfg.target_sigma_factor = parse_f64(v)?,
        "rotation_sigma_factor" => cfg.rotation_sigma_factor = parse_f64(v)?,
        "b" => {
            cfg.b = v
                .parse()
                .map_err(|_| format!("expected a bin count, got `{v}`"))?
        }
        "orientation_mode" => {
            cfg.orientation_mode = OrientationMode::parse(v)
                .ok_or_else(|| format!("unknown orientation mode `{v}`"))?
        }
        "eta" => cfg.eta = parse_f64(v)?,
        "rotation_method" => {
            cfg.rotation_method =
                RotationMethod::parse(v).ok_or_else(|| format!("unknown rotation method `{v}`"))?
        }
        "refinement" => cfg.refinement = parse_bool(v)?,
        "feature_mode" => {
            cfg.feature_mode =
                FeatureMode::parse(v).ok_or_else(|| format!("unknown feature mode `{v}`"))?
        }
        "rotation_kernel_sigma" => {
            cfg.rotation_kernel_sigma = match v {
                "linear" | "none" => None,
                _ => Some(parse_f64(v)?),
            }
        }
        "descriptor_smoothing" => cfg.descriptor_smoothing = parse_bool(v)?,
        "descriptor_eta" => cfg.descriptor_eta = parse_f64(v)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

/// Applies `key=value` settings on top of `base`. `settings` pairs each
/// setting with its line number for error messages.
pub fn apply_settings<'a>(
    base: &TrackerConfig,
    settings: impl IntoIterator<Item = (usize, &'a str)>,
    path: &Path,
) -> Result<TrackerConfig> {
    let mut cfg = base.clone();
    let mut sigma_given = false;
    for (line, text) in settings {
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got `{text}`")))?;
        apply_setting(&mut cfg, key, value).map_err(err)?;
        sigma_given |= key.trim() == "kernel_sigma";
    }
    if !sigma_given && cfg.feature_mode != base.feature_mode {
        cfg.kernel_sigma = cfg.feature_mode.default_kernel_sigma();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str, path: &Path) -> Result<TrackerConfig> {
    let lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    });
    apply_settings(&TrackerConfig::default(), lines, path)
}

pub fn load_config(path: &Path) -> Result<TrackerConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// Every field as `(key, value)`, in [`CONFIG_KEYS`] order. Floats use the
/// shortest representation that parses back to the same value.
pub fn config_entries(cfg: &TrackerConfig) -> Vec<(&'static str, String)> {
    vec![
        ("padding", cfg.padding.to_string()),
        ("lambda1", cfg.lambda1.to_string()),
        ("lambda2", cfg.lambda2.to_string()),
        ("kernel_sigma", cfg.kernel_sigma.to_string()),
        ("target_sigma_factor", cfg.target_sigma_factor.to_string()),
        (
            "rotation_sigma_factor",
            cfg.rotation_sigma_factor.to_string(),
        ),
        ("b", cfg.b.to_string()),
        ("orientation_mode", cfg.orientation_mode.name().to_string()),
        ("eta", cfg.eta.to_string()),
        ("rotation_method", cfg.rotation_method.name().to_string()),
        ("refinement", cfg.refinement.to_string()),
        ("feature_mode", cfg.feature_mode.name().to_string()),
        (
            "rotation_kernel_sigma",
            cfg.rotation_kernel_sigma
                .map_or_else(|| "linear".to_string(), |s| s.to_string()),
        ),
        ("descriptor_smoothing", cfg.descriptor_smoothing.to_string()),
        ("descriptor_eta", cfg.descriptor_eta.to_string()),
    ]
}

pub fn format_config(cfg: &TrackerConfig) -> String {
    config_entries(cfg)
        .into_iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}
