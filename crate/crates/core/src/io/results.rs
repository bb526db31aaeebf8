//! Run artifacts: per-frame records as CSV, metrics as JSON and plot data.
//!
//! Numbers are written with 6 decimals. Metrics are computed from the
//! records as written, so recomputing them from disk gives the same document.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::evaluation::MetricsReport;
use crate::io::config::config_entries;
use crate::tracker::{BBox, FrameRecord, TrackerConfig};

pub const RECORD_HEADER: &str =
    "frame,x,y,w,h,theta_deg,peak_baseline,peak_rotated,used_rotation,center_error";
pub const RECORDS_FILE: &str = "records.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const PRECISION_FILE: &str = "precision.csv";
pub const THETA_FILE: &str = "theta.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub records: PathBuf,
    pub metrics: PathBuf,
    pub precision: Option<PathBuf>,
    pub theta: PathBuf,
}

pub fn format_records(records: &[FrameRecord]) -> String {
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in records {
        let err = r
            .center_error
            .map_or_else(String::new, |e| format!("{e:.6}"));
        out += &format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            r.frame_index,
            r.bbox.x,
            r.bbox.y,
            r.bbox.w,
            r.bbox.h,
            r.theta_deg,
            r.peak_baseline,
            r.peak_rotated,
            u8::from(r.used_rotation),
            err
        );
    }
    out
}

pub fn parse_records(text: &str, path: &Path) -> Result<Vec<FrameRecord>> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    match lines.next() {
        Some((_, h)) if h.trim() == RECORD_HEADER => {}
        _ => return Err(err(1, "missing or unexpected header".into())),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 10 {
            return Err(err(
                line_no,
                format!("expected 10 fields, found {}", f.len()),
            ));
        }
        let num = |k: usize| -> Result<f64> {
            f[k].parse::<f64>().map_err(|_| {
                err(
                    line_no,
                    format!("field {} is not a number: `{}`", k + 1, f[k]),
                )
            })
        };
        let used = match f[8] {
            "0" => false,
            "1" => true,
            other => {
                return Err(err(
                    line_no,
                    format!("used_rotation must be 0 or 1, got `{other}`"),
                ))
            }
        };
        records.push(FrameRecord {
            frame_index: f[0]
                .parse()
                .map_err(|_| err(line_no, format!("bad frame index `{}`", f[0])))?,
            bbox: BBox::new(num(1)?, num(2)?, num(3)?, num(4)?),
            theta_deg: num(5)?,
            peak_baseline: num(6)?,
            peak_rotated: num(7)?,
            used_rotation: used,
            center_error: if f[9].is_empty() { None } else { Some(num(9)?) },
        });
    }
    Ok(records)
}

/// Records exactly as they read back from their CSV form.
pub fn quantize_records(records: &[FrameRecord]) -> Vec<FrameRecord> {
    parse_records(&format_records(records), Path::new("<memory>"))
        .expect("formatted records always parse")
}

fn round6(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// The metrics document: report fields (absent when not applicable) plus
/// the full effective config.
pub fn metrics_json(report: &MetricsReport, config: &TrackerConfig) -> Value {
    let mut doc = Map::new();
    if let Some(c) = &report.precision_curve {
        doc.insert(
            "precision_curve".into(),
            json!(c.iter().map(|&v| round6(v)).collect::<Vec<_>>()),
        );
    }
    let scalars = [
        ("precision_at_20", report.precision_at_20),
        ("mean_center_error", report.mean_center_error),
        ("mho_deg", report.mho_deg),
        ("success_rate", report.success_rate),
    ];
    for (key, value) in scalars {
        if let Some(v) = value {
            doc.insert(key.into(), json!(round6(v)));
        }
    }
    let cfg: Map<String, Value> = config_entries(config)
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    doc.insert("config".into(), Value::Object(cfg));
    Value::Object(doc)
}

pub fn format_metrics(report: &MetricsReport, config: &TrackerConfig) -> String {
    let mut s =
        serde_json::to_string_pretty(&metrics_json(report, config)).expect("metrics serialize");
    s.push('\n');
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes records, metrics and plot data into `out_dir`. Metrics are
/// computed from the quantized records.
pub fn write_results(
    records: &[FrameRecord],
    config: &TrackerConfig,
    out_dir: &Path,
) -> Result<(RunArtifacts, MetricsReport)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let quantized = quantize_records(records);
    let report = MetricsReport::from_records(
        &quantized,
        config.rotation_method != crate::tracker::RotationMethod::None,
    )?;

    let records_path = out_dir.join(RECORDS_FILE);
    write(&records_path, &format_records(records))?;
    let metrics_path = out_dir.join(METRICS_FILE);
    write(&metrics_path, &format_metrics(&report, config))?;

    let precision = match &report.precision_curve {
        Some(curve) => {
            let path = out_dir.join(PRECISION_FILE);
            write(&path, &format_precision(&[("precision", curve)]))?;
            Some(path)
        }
        None => None,
    };
    let theta_path = out_dir.join(THETA_FILE);
    let mut theta = String::from("frame,theta_deg,used_rotation\n");
    for r in &quantized {
        theta += &format!(
            "{},{:.6},{}\n",
            r.frame_index,
            r.theta_deg,
            u8::from(r.used_rotation)
        );
    }
    write(&theta_path, &theta)?;

    Ok((
        RunArtifacts {
            records: records_path,
            metrics: metrics_path,
            precision,
            theta: theta_path,
        },
        report,
    ))
}

/// A `tau,<name>...` table of precision curves.
pub fn format_precision(curves: &[(&str, &Vec<f64>)]) -> String {
    let mut out = String::from("tau");
    for (name, _) in curves {
        out += &format!(",{name}");
    }
    out.push('\n');
    let len = curves.iter().map(|(_, c)| c.len()).min().unwrap_or(0);
    for t in 0..len {
        out += &t.to_string();
        for (_, c) in curves {
            out += &format!(",{:.6}", c[t]);
        }
        out.push('\n');
    }
    out
}

/// Reads back the records and the metrics document of a run directory.
pub fn read_results(out_dir: &Path) -> Result<(Vec<FrameRecord>, Value)> {
    let records_path = out_dir.join(RECORDS_FILE);
    let text = fs::read_to_string(&records_path).map_err(|e| Error::io(&records_path, e))?;
    let records = parse_records(&text, &records_path)?;
    let metrics_path = out_dir.join(METRICS_FILE);
    let text = fs::read_to_string(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
    let metrics = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: metrics_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok((records, metrics))
}
