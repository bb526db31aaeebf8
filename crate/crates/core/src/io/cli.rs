//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::error::{Error, Result};
use crate::evaluation::{
    compare_records, run_rotation_benchmark, synthetic_bench_images, MetricsReport,
    RotationBenchSpec,
};
use crate::features::Envelope;
use crate::io::config::{apply_settings, load_config};
use crate::io::results::{
    format_metrics, format_precision, quantize_records, read_results, write_results,
};
use crate::io::sequence::{load_frame, load_sequence, parse_ground_truth, write_sequence};
use crate::io::synth::{generate_synthetic_sequence, SynthKind, SynthParams};
use crate::tracker::{run_sequence, BBox, RotationMethod, TrackerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rkcf",
    version,
    about = "Rotation-aware kernelized correlation filter tracker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TrackerArgs {
    /// Sequence directory with `img/` and optionally `groundtruth_rect.txt`.
    seq_dir: PathBuf,
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value setting; overrides the config file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
    /// Initial box `x,y,w,h` (1-indexed) when there is no ground truth.
    #[arg(long, value_name = "X,Y,W,H")]
    init: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "rkcf_out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EnvelopeArg {
    Cos,
    Gauss,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Filter,
    Correlation,
    Maxshift,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKindArg {
    Translate,
    Rotate,
    #[value(name = "translate_rotate")]
    TranslateRotate,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track a sequence and write records, metrics and plot data.
    Track {
        #[command(flatten)]
        args: TrackerArgs,
        /// Disable the rotation branch (plain kernelized correlation filter).
        #[arg(long)]
        no_rotation: bool,
    },
    /// Track with the rotation branch off and on and write both runs.
    Compare {
        #[command(flatten)]
        args: TrackerArgs,
    },
    /// Rotation-estimation benchmark over synthetic or supplied images.
    BenchRotation {
        /// Directory of PNG/JPEG source images.
        #[arg(long, conflicts_with = "synthetic")]
        images: Option<PathBuf>,
        /// Number of synthetic source textures.
        #[arg(long, default_value_t = 20)]
        synthetic: usize,
        #[arg(long, default_value_t = 100)]
        per_image: usize,
        #[arg(long, value_enum, default_value = "both")]
        envelope: EnvelopeArg,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["filter", "correlation", "maxshift"])]
        methods: Vec<MethodArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute metrics from a run directory and print them.
    Eval { out_dir: PathBuf },
    /// Write a synthetic sequence in the on-disk sequence layout.
    Synth {
        #[arg(value_enum)]
        kind: SynthKindArg,
        #[arg(long, default_value_t = 60)]
        frames: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Errors a command can end with: bad invocation or bad data.
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

/// Runs the CLI with `args` (including the program name), writing reports
/// to `stdout`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::Track { args, no_rotation } => track(&args, no_rotation, out),
        Command::Compare { args } => compare(&args, out),
        Command::BenchRotation {
            images,
            synthetic,
            per_image,
            envelope,
            methods,
            seed,
        } => bench(
            images.as_deref(),
            synthetic,
            per_image,
            envelope,
            &methods,
            seed,
            out,
        ),
        Command::Eval { out_dir } => eval(&out_dir, out),
        Command::Synth {
            kind,
            frames,
            out: dir,
            seed,
        } => synth(kind, frames, &dir, seed, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> std::result::Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Data(Error::io("<stdout>", e)))
}

fn effective_config(args: &TrackerArgs) -> std::result::Result<TrackerConfig, Failure> {
    let base = match &args.config {
        Some(path) => load_config(path)?,
        None => TrackerConfig::default(),
    };
    let settings = args
        .settings
        .iter()
        .enumerate()
        .map(|(i, s)| (i + 1, s.as_str()));
    apply_settings(&base, settings, Path::new("--set")).map_err(|e| Failure::Usage(e.to_string()))
}

fn init_box(args: &TrackerArgs) -> std::result::Result<Option<BBox>, Failure> {
    match &args.init {
        None => Ok(None),
        Some(text) => {
            let boxes = parse_ground_truth(text, Path::new("--init"))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            match boxes.as_slice() {
                [b] => Ok(Some(*b)),
                _ => Err(Failure::Usage("--init expects a single x,y,w,h box".into())),
            }
        }
    }
}

fn track(
    args: &TrackerArgs,
    no_rotation: bool,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let mut config = effective_config(args)?;
    if no_rotation {
        config = config.baseline();
    }
    let init = init_box(args)?;
    let sequence = load_sequence(&args.seq_dir)?.load_frames()?;
    info!(
        "tracking {} ({} frames)",
        sequence.name,
        sequence.frames.len()
    );
    let records = run_sequence(&sequence, &config, init)?;
    let (artifacts, report) = write_results(&records, &config, &args.out)?;
    emit(out, &summary(&sequence.name, &config, &report))?;
    emit(out, &format!("records: {}\n", artifacts.records.display()))
}

fn summary(name: &str, config: &TrackerConfig, report: &MetricsReport) -> String {
    let mut s = format!("{name} [{}]", config.rotation_method.name());
    if let Some(p) = report.precision_at_20 {
        s += &format!(" precision@20 {p:.4}");
    }
    if let Some(e) = report.mean_center_error {
        s += &format!(" mean_error {e:.3}");
    }
    if let Some(m) = report.mho_deg {
        s += &format!(" mho {m:.3}");
    }
    if let Some(r) = report.success_rate {
        s += &format!(" success_rate {r:.4}");
    }
    s.push('\n');
    s
}

fn compare(args: &TrackerArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let config = effective_config(args)?;
    let rkcf_config = if config.rotation_method == RotationMethod::None {
        TrackerConfig {
            rotation_method: RotationMethod::Filter,
            ..config.clone()
        }
    } else {
        config.clone()
    };
    let base_config = config.baseline();
    let init = init_box(args)?;
    let sequence = load_sequence(&args.seq_dir)?.load_frames()?;
    if sequence.ground_truth.is_none() {
        return Err(Failure::Data(Error::param(
            "sequence",
            "compare needs ground truth",
        )));
    }
    let base = run_sequence(&sequence, &base_config, init)?;
    let rkcf = run_sequence(&sequence, &rkcf_config, init)?;
    write_results(&base, &base_config, &args.out.join("baseline"))?;
    write_results(&rkcf, &rkcf_config, &args.out.join("rkcf"))?;
    let cmp = compare_records(quantize_records(&base), quantize_records(&rkcf))?;
    let (Some(bc), Some(rc)) = (&cmp.baseline.precision_curve, &cmp.rkcf.precision_curve) else {
        unreachable!("ground truth checked above");
    };
    let table = format_precision(&[
        ("baseline", bc),
        ("rkcf", rc),
        ("difference", &cmp.precision_difference),
    ]);
    let path = args.out.join("difference.csv");
    fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    emit(out, &summary(&sequence.name, &base_config, &cmp.baseline))?;
    emit(out, &summary(&sequence.name, &rkcf_config, &cmp.rkcf))
}

fn bench(
    images: Option<&Path>,
    synthetic: usize,
    per_image: usize,
    envelope: EnvelopeArg,
    methods: &[MethodArg],
    seed: u64,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let sources = match images {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension().and_then(|e| e.to_str()).is_some_and(|e| {
                        matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg")
                    })
                })
                .collect();
            paths.sort();
            paths
                .iter()
                .map(|p| load_frame(p))
                .collect::<Result<Vec<_>>>()?
        }
        None => synthetic_bench_images(synthetic, seed),
    };
    let mut spec = RotationBenchSpec::new(sources, per_image, seed);
    spec.envelopes = match envelope {
        EnvelopeArg::Cos => vec![Envelope::Cosine],
        EnvelopeArg::Gauss => vec![Envelope::Gaussian],
        EnvelopeArg::Both => vec![Envelope::Cosine, Envelope::Gaussian],
    };
    let mut chosen = Vec::new();
    for m in methods {
        let m = match m {
            MethodArg::Filter => RotationMethod::Filter,
            MethodArg::Correlation => RotationMethod::Correlation,
            MethodArg::Maxshift => RotationMethod::MaxShift,
        };
        if !chosen.contains(&m) {
            chosen.push(m);
        }
    }
    spec.methods = chosen;
    let table = run_rotation_benchmark(&spec).map_err(|e| match e {
        Error::InvalidParameter { .. } => Failure::Usage(e.to_string()),
        other => Failure::Data(other),
    })?;
    emit(
        out,
        &format!(
            "mean absolute rotation error (degrees), {} images x {} rotations, seed {}\n",
            spec.images.len(),
            per_image,
            seed
        ),
    )?;
    emit(out, &table.format())
}

fn eval(dir: &Path, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let (records, metrics) = read_results(dir)?;
    let mut config = TrackerConfig::default();
    if let Some(cfg) = metrics.get("config").and_then(|c| c.as_object()) {
        let lines: Vec<String> = cfg
            .iter()
            .map(|(k, v)| format!("{k}={}", v.as_str().unwrap_or_default()))
            .collect();
        config = apply_settings(
            &config,
            lines.iter().enumerate().map(|(i, l)| (i + 1, l.as_str())),
            &dir.join(crate::io::results::METRICS_FILE),
        )?;
    }
    let report =
        MetricsReport::from_records(&records, config.rotation_method != RotationMethod::None)?;
    emit(out, &format_metrics(&report, &config))
}

fn synth(
    kind: SynthKindArg,
    frames: usize,
    dir: &Path,
    seed: u64,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let kind = match kind {
        SynthKindArg::Translate => SynthKind::Translate,
        SynthKindArg::Rotate => SynthKind::Rotate,
        SynthKindArg::TranslateRotate => SynthKind::TranslateRotate,
    };
    let s = generate_synthetic_sequence(kind, frames, &SynthParams::default(), seed)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    write_sequence(&s.sequence, dir)?;
    let path = dir.join("orientation.csv");
    let text: String = std::iter::once("frame,orientation_deg\n".to_string())
        .chain(
            s.orientations
                .iter()
                .enumerate()
                .map(|(i, o)| format!("{},{o:.6}\n", i + 1)),
        )
        .collect();
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    emit(
        out,
        &format!("wrote {} frames to {}\n", frames, dir.display()),
    )
}
