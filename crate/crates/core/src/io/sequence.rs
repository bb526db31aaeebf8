//! Image sequences in the OTB directory layout:
//!
//! ```text
//! <seq>/img/0001.jpg ...        zero-padded numbered frames (PNG or JPEG)
//! <seq>/groundtruth_rect.txt    one `x,y,w,h` per frame, 1-indexed
//! ```
//!
//! Ground-truth fields may be separated by commas, tabs or spaces. Boxes are
//! converted to the 0-indexed convention used internally on load and back
//! to 1-indexed on write.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::features::to_grayscale;
use crate::tracker::{BBox, Sequence};

pub const IMAGE_DIR: &str = "img";
pub const GROUND_TRUTH_FILE: &str = "groundtruth_rect.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub name: String,
    pub frame_paths: Vec<PathBuf>,
    pub ground_truth: Option<Vec<BBox>>,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
        .unwrap_or(false)
}

/// Parses ground-truth text. `path` is only used in error messages.
pub fn parse_ground_truth(text: &str, path: &Path) -> Result<Vec<BBox>> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if fields.len() != 4 {
            return Err(parse_err(format!(
                "expected 4 fields, found {}",
                fields.len()
            )));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(format!("not a number: `{f}`")))?;
        }
        if !(v[2] > 0.0 && v[3] > 0.0) {
            return Err(parse_err(format!(
                "non-positive box size {}x{}",
                v[2], v[3]
            )));
        }
        boxes.push(BBox::new(v[0] - 1.0, v[1] - 1.0, v[2], v[3]));
    }
    Ok(boxes)
}

/// Reads the frame list and ground truth of an OTB-style sequence directory.
pub fn load_sequence(dir: &Path) -> Result<SequenceSpec> {
    let img_dir = dir.join(IMAGE_DIR);
    let entries = fs::read_dir(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
    let mut frames: Vec<(u64, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&img_dir, e))?.path();
        if !is_image(&path) {
            continue;
        }
        let Some(number) = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok())
        else {
            warn!("skipping non-numbered frame {}", path.display());
            continue;
        };
        frames.push((number, path));
    }
    if frames.is_empty() {
        return Err(Error::Image {
            path: img_dir,
            message: "no numbered PNG or JPEG frames".into(),
        });
    }
    frames.sort();
    let mut frame_paths: Vec<PathBuf> = frames.into_iter().map(|(_, p)| p).collect();

    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = if gt_path.exists() {
        let text = fs::read_to_string(&gt_path).map_err(|e| Error::io(&gt_path, e))?;
        let mut boxes = parse_ground_truth(&text, &gt_path)?;
        if boxes.len() != frame_paths.len() {
            let n = boxes.len().min(frame_paths.len());
            warn!(
                "{}: {} frames but {} ground-truth boxes; truncating to {n}",
                dir.display(),
                frame_paths.len(),
                boxes.len()
            );
            boxes.truncate(n);
            frame_paths.truncate(n);
        }
        Some(boxes)
    } else {
        None
    };

    let name = dir
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence")
        .to_string();
    Ok(SequenceSpec {
        name,
        frame_paths,
        ground_truth,
    })
}

/// Loads one frame as grayscale in `[0, 1]`.
pub fn load_frame(path: &Path) -> Result<Array2<f64>> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let pixels = if img.color().has_color() {
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Array3::from_shape_fn((h as usize, w as usize, 3), |(r, c, ch)| {
            rgb.get_pixel(c as u32, r as u32)[ch] as f64 / 255.0
        })
    } else {
        let gray = img.to_luma8();
        let (w, h) = gray.dimensions();
        Array3::from_shape_fn((h as usize, w as usize, 1), |(r, c, _)| {
            gray.get_pixel(c as u32, r as u32)[0] as f64 / 255.0
        })
    };
    to_grayscale(&pixels)
}

impl SequenceSpec {
    pub fn len(&self) -> usize {
        self.frame_paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame_paths.is_empty()
    }

    /// Decodes every frame into memory.
    pub fn load_frames(&self) -> Result<Sequence> {
        let frames = self
            .frame_paths
            .iter()
            .map(|p| load_frame(p))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = frames.first() {
            if let Some((i, f)) = frames
                .iter()
                .enumerate()
                .find(|(_, f)| f.dim() != first.dim())
            {
                return Err(Error::Image {
                    path: self.frame_paths[i].clone(),
                    message: format!("frame size {:?} differs from {:?}", f.dim(), first.dim()),
                });
            }
        }
        Ok(Sequence {
            name: self.name.clone(),
            frames,
            ground_truth: self.ground_truth.clone(),
        })
    }
}

/// Formats boxes as 1-indexed comma-separated ground-truth lines.
pub fn format_ground_truth(boxes: &[BBox]) -> String {
    boxes
        .iter()
        .map(|b| format!("{:.3},{:.3},{:.3},{:.3}\n", b.x + 1.0, b.y + 1.0, b.w, b.h))
        .collect()
}

/// Writes a sequence in the OTB layout with 8-bit grayscale PNG frames.
pub fn write_sequence(sequence: &Sequence, dir: &Path) -> Result<SequenceSpec> {
    let img_dir = dir.join(IMAGE_DIR);
    fs::create_dir_all(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
    let mut frame_paths = Vec::with_capacity(sequence.frames.len());
    for (i, frame) in sequence.frames.iter().enumerate() {
        let (rows, cols) = frame.dim();
        let buf: Vec<u8> = frame
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let img = image::GrayImage::from_raw(cols as u32, rows as u32, buf)
            .expect("buffer matches dimensions");
        let path = img_dir.join(format!("{:04}.png", i + 1));
        img.save(&path).map_err(|e| Error::Image {
            path: path.clone(),
            message: e.to_string(),
        })?;
        frame_paths.push(path);
    }
    if let Some(gt) = &sequence.ground_truth {
        let path = dir.join(GROUND_TRUTH_FILE);
        fs::write(&path, format_ground_truth(gt)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(SequenceSpec {
        name: sequence.name.clone(),
        frame_paths,
        ground_truth: sequence.ground_truth.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_frames(dir: &Path, n: usize) {
        let seq = Sequence {
            name: "t".into(),
            frames: (0..n)
                .map(|i| Array2::from_shape_fn((12, 16), |(r, c)| ((r + c + i) % 7) as f64 / 7.0))
                .collect(),
            ground_truth: None,
        };
        write_sequence(&seq, dir).unwrap();
    }

    #[test]
    fn delimiters_are_interchangeable() {
        let p = Path::new("gt.txt");
        let comma = parse_ground_truth("10,20,30,40\n1,2,3,4\n", p).unwrap();
        let tab = parse_ground_truth("10\t20\t30\t40\n1\t2\t3\t4\n", p).unwrap();
        let space = parse_ground_truth("10 20  30 40\n\n1 2 3 4", p).unwrap();
        assert_eq!(comma, tab);
        assert_eq!(comma, space);
        assert_eq!(comma[0], BBox::new(9.0, 19.0, 30.0, 40.0));
    }

    #[test]
    fn malformed_line_reports_position() {
        let err = parse_ground_truth("1,2,3,4\n1,2,x,4\n", Path::new("gt.txt")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_ground_truth("1,2,3\n", Path::new("gt.txt")).is_err());
        assert!(parse_ground_truth("1,2,0,4\n", Path::new("gt.txt")).is_err());
    }

    #[test]
    fn loads_three_frames_with_boxes() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(dir.path(), 3);
        fs::write(
            dir.path().join(GROUND_TRUTH_FILE),
            "1,1,5,5\n2,2,5,5\n3,3,5,5\n",
        )
        .unwrap();
        let spec = load_sequence(dir.path()).unwrap();
        assert_eq!(spec.len(), 3);
        assert_eq!(
            spec.ground_truth.as_ref().unwrap()[2],
            BBox::new(2.0, 2.0, 5.0, 5.0)
        );
        let seq = spec.load_frames().unwrap();
        assert_eq!(seq.frames.len(), 3);
        assert_eq!(seq.frames[0].dim(), (12, 16));
        assert!((seq.frames[1][[0, 0]] - (1.0f64 / 7.0 * 255.0).round() / 255.0).abs() < 1e-12);
    }

    #[test]
    fn frames_sorted_numerically_and_truncated() {
        let dir = tempfile::tempdir().unwrap();
        write_frames(dir.path(), 10);
        // a non-padded name that sorts wrongly as text
        fs::rename(
            dir.path().join("img/0010.png"),
            dir.path().join("img/10.png"),
        )
        .unwrap();
        let gt: String = (0..8).map(|i| format!("{i},1,5,5\n")).collect();
        fs::write(dir.path().join(GROUND_TRUTH_FILE), gt).unwrap();
        let spec = load_sequence(dir.path()).unwrap();
        assert_eq!(spec.len(), 8);
        assert_eq!(spec.ground_truth.unwrap().len(), 8);
        assert!(spec.frame_paths[7].ends_with("0008.png"));

        let full = load_sequence(dir.path());
        assert!(full.is_ok());
    }

    #[test]
    fn missing_images_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_sequence(dir.path()).is_err());
        fs::create_dir_all(dir.path().join(IMAGE_DIR)).unwrap();
        assert!(load_sequence(dir.path()).is_err());
    }

    #[test]
    fn ground_truth_round_trips_through_text() {
        let boxes = vec![
            BBox::new(0.5, 3.25, 10.0, 12.125),
            BBox::new(-2.0, 7.0, 1.0, 2.0),
        ];
        let parsed = parse_ground_truth(&format_ground_truth(&boxes), Path::new("gt")).unwrap();
        assert_eq!(parsed, boxes);
    }
}
