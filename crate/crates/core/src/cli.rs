//! Command-line front end: `evaluate`, `sweep` and `iou-study`.
//!
//! Results go to stdout (metrics, written file paths); progress goes to
//! stderr. Exit codes: 0 success, 1 usage error, 2 input/parse error,
//! 3 internal invariant violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coco_io::{gt_as_detections, load_dataset, load_detections, Dataset, Detection};
use crate::error::{Error, Result};
use crate::evaluator::{ApSummary, EvalParams, Evaluator};
use crate::geometry::Direction;
use crate::report::{
    decay_chart, sweep_chart, write_decay_csv, write_svg_chart, write_sweep_csv,
};
use crate::sweep::{
    run_direction_matrix, run_scaling_sweep, run_sweep, PerturbationKind, Regime, Scaling,
    SweepResult,
};
use crate::synthetic::{
    generate_boxes, iou_decay_fixed, iou_decay_proportional, proportional_offsets,
    RandomBoxConfig,
};

const DEFAULT_PIXEL_OFFSETS: &str = "0..10";
const CHART_CURVES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print the six headline AP metrics for a detection set.
    Evaluate,
    /// Evaluate translated or rescaled detections over a list of offsets.
    Sweep,
    /// IOU decay of random boxes under proportional and pixel shifts.
    IouStudy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Translate,
    Enlarge,
    Shrink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Random,
    Fixed,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// COCO instances annotation file.
    #[arg(long, global = true)]
    pub annotations: Option<PathBuf>,
    /// COCO results file with scored detections.
    #[arg(long, global = true)]
    pub detections: Option<PathBuf>,
    /// Submit every ground-truth box as a score-1 detection.
    #[arg(long, global = true)]
    pub gt_as_predictions: bool,
    #[arg(long, global = true, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, global = true, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Fixed-regime direction; omit to sweep all eight.
    #[arg(long, global = true)]
    pub direction: Option<String>,
    /// `A..B` (unit steps), `A..B:STEP`, or a comma-separated list.
    #[arg(long, global = true)]
    pub offsets: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Parser)]
#[command(name = "ap-perturb", version, about = "AP sensitivity to bounding-box perturbations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectionSource {
    File(PathBuf),
    GroundTruth,
}

/// Validated settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub annotations: Option<PathBuf>,
    pub detections: Option<DetectionSource>,
    pub kind: KindArg,
    pub regime: RegimeArg,
    pub direction: Option<Direction>,
    pub offsets: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| usage(format!("`{s}` is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(usage(format!("offset `{s}` must be finite and non-negative")));
    }
    Ok(v)
}

/// Parses an offset list: `0..10`, `0..1:0.1`, `0,1,2.5` or a single value.
/// Ranges are inclusive and evaluated like `numpy.linspace`.
pub fn parse_offsets(spec: &str) -> Result<Vec<f64>> {
    let values = if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, parse_number(step)?),
            None => (rest, 1.0),
        };
        let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
        if step <= 0.0 {
            return Err(usage("offset step must be positive"));
        }
        if hi < lo {
            return Err(usage(format!("empty offset range `{spec}`")));
        }
        let n = ((hi - lo) / step).round() as usize + 1;
        if n > 10_000 {
            return Err(usage(format!("offset range `{spec}` has too many values")));
        }
        if n == 1 {
            vec![lo]
        } else {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| i as f64 * step + lo).collect();
            v[n - 1] = hi;
            v
        }
    } else {
        spec.split(',').map(parse_number).collect::<Result<Vec<_>>>()?
    };
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage(format!("offsets in `{spec}` must be strictly increasing")));
    }
    Ok(values)
}

impl RunConfig {
    pub fn from_args(command: Command, args: RunArgs) -> Result<Self> {
        let detections = match (&args.detections, args.gt_as_predictions) {
            (Some(_), true) => {
                return Err(usage("--detections and --gt-as-predictions are mutually exclusive"))
            }
            (Some(p), false) => Some(DetectionSource::File(p.clone())),
            (None, true) => Some(DetectionSource::GroundTruth),
            (None, false) => None,
        };
        if matches!(command, Command::Evaluate | Command::Sweep) {
            if args.annotations.is_none() {
                return Err(usage("--annotations is required"));
            }
            if detections.is_none() {
                return Err(usage("either --detections or --gt-as-predictions is required"));
            }
        }
        let kind = args.kind.unwrap_or(KindArg::Translate);
        if kind != KindArg::Translate && (args.regime.is_some() || args.direction.is_some()) {
            return Err(usage("--regime and --direction only apply to --kind translate"));
        }
        let regime = args.regime.unwrap_or(RegimeArg::Random);
        let direction = args
            .direction
            .as_deref()
            .map(str::parse::<Direction>)
            .transpose()?;
        if direction.is_some() && regime != RegimeArg::Fixed {
            return Err(usage("--direction requires --regime fixed"));
        }
        let offsets = parse_offsets(args.offsets.as_deref().unwrap_or(DEFAULT_PIXEL_OFFSETS))?;
        Ok(RunConfig {
            command,
            annotations: args.annotations,
            detections,
            kind,
            regime,
            direction,
            offsets,
            seed: args.seed,
            out: args.out,
            threads: args.threads,
        })
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    fn load(&self) -> Result<(Dataset, Vec<Detection>)> {
        let path = self
            .annotations
            .as_ref()
            .ok_or_else(|| usage("--annotations is required"))?;
        let ds = load_dataset(path)?;
        let dets = match &self.detections {
            Some(DetectionSource::File(p)) => load_detections(p, &ds)?,
            Some(DetectionSource::GroundTruth) => gt_as_detections(&ds),
            None => return Err(usage("either --detections or --gt-as-predictions is required")),
        };
        Ok((ds, dets))
    }
}

fn print_summary(summary: &ApSummary, stdout: &mut dyn Write) -> Result<()> {
    for (name, v) in ApSummary::METRIC_NAMES.iter().zip(summary.to_array()) {
        writeln!(stdout, "{name} {v:.6}").map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

/// Prints the six metrics; with `--out`, also writes `summary.csv`.
pub fn cmd_evaluate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<ApSummary> {
    let (ds, dets) = cfg.load()?;
    eprintln!(
        "evaluating {} detections on {} images",
        dets.len(),
        ds.images().len()
    );
    let summary = Evaluator::new(&ds, EvalParams::default()).evaluate(&dets)?;
    print_summary(&summary, stdout)?;
    if cfg.out.is_some() {
        let path = cfg.out_dir()?.join("summary.csv");
        let mut text = ApSummary::METRIC_NAMES.join(",");
        text.push('\n');
        let values: Vec<String> = summary.to_array().iter().map(|v| format!("{v:.6}")).collect();
        text.push_str(&values.join(","));
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

fn emit_sweep(
    result: &SweepResult,
    dir: &Path,
    stem: &str,
    stdout: &mut dyn Write,
) -> Result<Vec<PathBuf>> {
    let csv = dir.join(format!("{stem}.csv"));
    let svg = dir.join(format!("{stem}.svg"));
    write_sweep_csv(result, &csv)?;
    let title = format!("AP under {} perturbation", result.kind);
    write_svg_chart(&sweep_chart(result, &title), &svg)?;
    for p in [&csv, &svg] {
        writeln!(stdout, "{}", p.display()).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(vec![csv, svg])
}

/// Runs the sweep selected by the flags and writes one CSV and one SVG per
/// sweep. A fixed regime without `--direction` runs all eight directions.
pub fn cmd_sweep(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let (ds, dets) = cfg.load()?;
    let dir = cfg.out_dir()?;
    let evaluator = Evaluator::new(&ds, EvalParams::default());
    eprintln!(
        "sweeping {} detections over {} offsets",
        dets.len(),
        cfg.offsets.len()
    );
    let mut written = Vec::new();
    match (cfg.kind, cfg.regime, cfg.direction) {
        (KindArg::Translate, RegimeArg::Random, _) => {
            let kind = PerturbationKind::Translate(Regime::RandomDirection);
            let res = run_sweep(&evaluator, &dets, kind, &cfg.offsets, cfg.seed)?;
            written.extend(emit_sweep(&res, &dir, "translate_random", stdout)?);
        }
        (KindArg::Translate, RegimeArg::Fixed, Some(d)) => {
            let kind = PerturbationKind::Translate(Regime::Fixed(d));
            let res = run_sweep(&evaluator, &dets, kind, &cfg.offsets, cfg.seed)?;
            written.extend(emit_sweep(&res, &dir, &format!("translate_fixed_{d}"), stdout)?);
        }
        (KindArg::Translate, RegimeArg::Fixed, None) => {
            let matrix = run_direction_matrix(&evaluator, &dets, &cfg.offsets, cfg.seed)?;
            for (d, res) in &matrix {
                written.extend(emit_sweep(res, &dir, &format!("translate_fixed_{d}"), stdout)?);
            }
        }
        (KindArg::Enlarge, ..) => {
            let res = run_scaling_sweep(&evaluator, &dets, Scaling::Enlarge, &cfg.offsets)?;
            written.extend(emit_sweep(&res, &dir, "enlarge", stdout)?);
        }
        (KindArg::Shrink, ..) => {
            let res = run_scaling_sweep(&evaluator, &dets, Scaling::Shrink, &cfg.offsets)?;
            written.extend(emit_sweep(&res, &dir, "shrink", stdout)?);
        }
    }
    Ok(written)
}

/// Proportional (0..1 step 0.1) and fixed-pixel decay on default random boxes.
pub fn cmd_iou_study(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let dir = cfg.out_dir()?;
    let boxes = generate_boxes(&RandomBoxConfig {
        seed: cfg.seed,
        ..RandomBoxConfig::default()
    })?;
    let proportional = iou_decay_proportional(&boxes, &proportional_offsets())?;
    let fixed = iou_decay_fixed(&boxes, &cfg.offsets)?;

    let mut written = Vec::new();
    for (table, x_label) in [
        (&proportional, "offset (fraction of box size)"),
        (&fixed, "offset (pixels)"),
    ] {
        let stem = format!("iou_{}", table.mode.name());
        let csv = dir.join(format!("{stem}.csv"));
        let svg = dir.join(format!("{stem}.svg"));
        write_decay_csv(table, &csv)?;
        let title = format!("IOU under {} diagonal shift", table.mode.name());
        write_svg_chart(&decay_chart(table, &title, x_label, CHART_CURVES), &svg)?;
        for p in [&csv, &svg] {
            writeln!(stdout, "{}", p.display()).map_err(|e| Error::io("<stdout>", e))?;
        }
        written.push(csv);
        written.push(svg);
    }
    Ok(written)
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => 1,
        Error::Contract(_) => 3,
        Error::InvalidBox { .. }
        | Error::InvalidOffset { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::Io { .. } => 2,
    }
}

/// Executes one validated configuration on a pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig, stdout: &mut (dyn Write + Send)) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Contract(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Evaluate => cmd_evaluate(cfg, stdout).map(|_| ()),
        Command::Sweep => cmd_sweep(cfg, stdout).map(|_| ()),
        Command::IouStudy => cmd_iou_study(cfg, stdout).map(|_| ()),
    })
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::from_args(parsed.command, parsed.args).and_then(|cfg| run(&cfg, stdout));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
