//! End-to-end runs of the `rkcf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rkcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkcf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth(dir: &Path, kind: &str, frames: &str) -> String {
    let out = dir.join(kind);
    let s = out.to_str().unwrap().to_string();
    let o = rkcf(&["synth", kind, "--frames", frames, "--out", &s]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    s
}

#[test]
fn two_frame_track_writes_one_record() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "translate", "2");
    let out = tmp.path().join("out");
    let o = rkcf(&["track", &seq, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["precision_curve"].as_array().unwrap().len(), 51);
    assert_eq!(metrics["config"]["rotation_method"], "filter");
    assert!(out.join("precision.csv").exists() && out.join("theta.csv").exists());
}

#[test]
fn config_file_and_flags_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "rotate", "3");
    let cfg = tmp.path().join("tracker.cfg");
    fs::write(&cfg, "# test\nrotation_method=correlation\neta=0.05\n").unwrap();
    let out = tmp.path().join("out");
    let o = rkcf(&[
        "track",
        &seq,
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "eta=0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["config"]["rotation_method"], "correlation");
    assert_eq!(metrics["config"]["eta"], "0.1");
    assert!(metrics.get("mho_deg").is_some());
}

#[test]
fn no_rotation_omits_rotation_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "translate", "3");
    let out = tmp.path().join("out");
    assert!(rkcf(&[
        "track",
        &seq,
        "--no-rotation",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let text = fs::read_to_string(out.join("metrics.json")).unwrap();
    assert!(!text.contains("mho_deg") && !text.contains("success_rate") && !text.contains("null"));
    let csv = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(8) == Some("0")));
}

#[test]
fn compare_writes_difference_table() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "translate_rotate", "4");
    let out = tmp.path().join("cmp");
    let o = rkcf(&["compare", &seq, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let diff = fs::read_to_string(out.join("difference.csv")).unwrap();
    assert!(diff.starts_with("tau,baseline,rkcf,difference\n"));
    assert_eq!(diff.lines().count(), 52);
    assert!(out.join("baseline/records.csv").exists() && out.join("rkcf/records.csv").exists());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn synth_writes_one_indexed_ground_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "translate", "3");
    let gt = fs::read_to_string(Path::new(&seq).join("groundtruth_rect.txt")).unwrap();
    assert_eq!(gt.lines().count(), 3);
    let spec = rkcf::io::sequence::load_sequence(Path::new(&seq)).unwrap();
    let first = spec.ground_truth.unwrap()[0];
    let x1: f64 = gt
        .lines()
        .next()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((first.x + 1.0 - x1).abs() < 1e-9);
    assert!(Path::new(&seq).join("img/0003.png").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(rkcf(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(rkcf(&["track", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        rkcf(&[
            "synth",
            "translate",
            "--frames",
            "1",
            "--out",
            "/nonexistent/x"
        ])
        .status
        .code(),
        Some(1)
    );
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().to_str().unwrap();
    assert_eq!(rkcf(&["track", empty]).status.code(), Some(2));
    assert_eq!(rkcf(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_ground_truth_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = synth(tmp.path(), "translate", "2");
    fs::write(
        Path::new(&seq).join("groundtruth_rect.txt"),
        "1,2,3,4\n1,2,three,4\n",
    )
    .unwrap();
    let o = rkcf(&[
        "track",
        &seq,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("groundtruth_rect.txt:2:"), "{err}");
}

#[test]
fn bench_rotation_accepts_image_directory() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, img) in rkcf::evaluation::synthetic_bench_images(2, 4)
        .iter()
        .enumerate()
    {
        let (h, w) = img.dim();
        let buf: Vec<u8> = img.iter().map(|v| (v * 255.0).round() as u8).collect();
        image::GrayImage::from_raw(w as u32, h as u32, buf)
            .unwrap()
            .save(tmp.path().join(format!("src{i}.png")))
            .unwrap();
    }
    let o = rkcf(&[
        "bench-rotation",
        "--images",
        tmp.path().to_str().unwrap(),
        "--per-image",
        "4",
        "--envelope",
        "gauss",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("2 images x 4 rotations"));
    assert!(text.lines().last().unwrap().starts_with("gauss"));
}
