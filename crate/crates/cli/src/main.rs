//! `locblur synth | stats | eval`.
//!
//! Synth settings are layered: built-in defaults, then `--config`, then
//! `LOCBLUR_*` environment variables (`LOCBLUR_SEED`, `LOCBLUR_WORKERS`,
//! `LOCBLUR_OUT` or any config key in upper case), then flags.
//!
//! Exit codes: 0 success, 1 partial failure, 2 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use locblur::metrics::PeakMode;
use locblur::motion::CurveMode;
use locblur::pipeline::{
    run_eval, run_stats, run_synth, EvalCommand, FlowSource, StatsCommand, StatsInput, SynthConfig,
};
use locblur::synth::MaskMode;

const EXIT_PARTIAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "locblur", version, about = "Local motion blur synthesis and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize blurred/sharp/mask triples into a dataset directory.
    Synth(SynthArgs),
    /// Blurred-area-ratio curve of a dataset or a list of frame sequences.
    Stats(StatsArgs),
    /// PSNR/SSIM of restored images against references.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output dataset directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    backgrounds: Option<PathBuf>,
    #[arg(long)]
    objects: Option<PathBuf>,
    #[arg(long, value_enum)]
    mask_mode: Option<MaskArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MaskArg {
    Union,
    Mid,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    GroundTruth,
    Estimated,
}

#[derive(Clone, Copy, ValueEnum)]
enum PeakArg {
    Unit,
    #[value(name = "8bit")]
    EightBit,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset directory written by `synth`.
    #[arg(long, conflicts_with = "pairs", required_unless_present = "pairs")]
    dataset: Option<PathBuf>,
    /// Text file with one image sequence per line.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ground-truth")]
    mode: SourceArg,
    /// Pool pixels across fields instead of averaging per-field curves.
    #[arg(long)]
    pooled: bool,
    /// Frames around the middle frame spanned by each flow pair.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Curve CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-field curves as `field,threshold,ratio`.
    #[arg(long)]
    per_field: Option<PathBuf>,
    /// Directory for `.flo` exports.
    #[arg(long)]
    flow_out: Option<PathBuf>,
    #[arg(long, env = "LOCBLUR_WORKERS", default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Directory of `<name>.flo` fields enabling stratified metrics.
    #[arg(long)]
    flow: Option<PathBuf>,
    #[arg(long, default_value_t = locblur::metrics::DEFAULT_STRATIFY_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "unit")]
    peak: PeakArg,
    /// JSON report path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long, env = "LOCBLUR_WORKERS", default_value_t = 0)]
    workers: usize,
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Config(String),
    Partial(String),
}

impl From<locblur::Error> for Failure {
    fn from(e: locblur::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn synth_config(a: &SynthArgs) -> Result<SynthConfig, Failure> {
    let base = match &a.config {
        Some(p) => SynthConfig::from_json_file(p)?,
        None => SynthConfig::default(),
    };
    let mut cfg = base.apply_env(std::env::vars())?;
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.workers {
        cfg.worker_count = v;
    }
    if let Some(v) = &a.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = a.samples {
        cfg.sample_count = v;
    }
    if let Some(v) = &a.backgrounds {
        cfg.background_dir = v.clone();
    }
    if let Some(v) = &a.objects {
        cfg.object_dir = v.clone();
    }
    if let Some(m) = a.mask_mode {
        cfg.mask_mode = match m {
            MaskArg::Union => MaskMode::Union,
            MaskArg::Mid => MaskMode::Mid,
        };
    }
    Ok(cfg)
}

fn synth(a: SynthArgs) -> Result<(), Failure> {
    let cfg = synth_config(&a)?;
    let out = run_synth(&cfg)?;
    println!("wrote {} samples to {}", out.written(), out.output_dir.display());
    let skipped = out.skipped();
    if skipped.is_empty() {
        return Ok(());
    }
    for r in out.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("warning: sample {} skipped: {}", r.name, r.error.as_deref().unwrap_or(""));
    }
    Err(Failure::Partial(format!("{} of {} samples skipped", skipped.len(), out.records.len())))
}

fn stats(a: StatsArgs) -> Result<(), Failure> {
    let input = match (a.dataset, a.pairs) {
        (Some(d), _) => StatsInput::Dataset(d),
        (None, Some(p)) => StatsInput::PairList(p),
        (None, None) => unreachable!("clap requires one input"),
    };
    let source = match a.mode {
        SourceArg::GroundTruth => FlowSource::GroundTruth,
        SourceArg::Estimated => FlowSource::Estimated,
    };
    let mut cmd = StatsCommand::new(input, source);
    cmd.mode = if a.pooled { CurveMode::Pooled } else { CurveMode::Mean };
    cmd.window = a.window;
    cmd.flow_out = a.flow_out;
    cmd.worker_count = a.workers;
    if let Some(v) = a.alpha {
        cmd.flow.alpha = v;
    }
    if let Some(v) = a.iterations {
        cmd.flow.iterations = v;
    }
    if let Some(v) = a.levels {
        cmd.flow.levels = v;
    }
    let out = run_stats(&cmd)?;
    for (name, e) in &out.failures {
        eprintln!("warning: {name}: {e}");
    }
    let Some(curve) = &out.curve else {
        return Err(Failure::Partial("every input failed".into()));
    };
    match &a.out {
        Some(p) => write_file(p, &curve.to_csv())?,
        None => print!("{}", curve.to_csv()),
    }
    if let Some(p) = &a.per_field {
        write_file(p, &out.per_field_csv())?;
    }
    eprintln!("{}", out.summary());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), Failure> {
    let mut cmd = EvalCommand::new(a.pred, a.gt);
    cmd.flow_dir = a.flow;
    cmd.threshold = a.threshold;
    cmd.options.peak = match a.peak {
        PeakArg::Unit => PeakMode::Unit,
        PeakArg::EightBit => PeakMode::EightBit,
    };
    cmd.worker_count = a.workers;
    let out = run_eval(&cmd)?;
    write_file(&a.out, &out.to_json())?;
    print!("{}", out.table());
    for name in &out.unmatched {
        eprintln!("warning: {name} has no counterpart, skipped");
    }
    for (name, e) in &out.failures {
        eprintln!("warning: {name}: {e}");
    }
    if out.is_complete() {
        Ok(())
    } else {
        Err(Failure::Partial("some image pairs were not scored".into()))
    }
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Synth(a) => synth(a),
        Command::Stats(a) => stats(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial(m)) => {
            eprintln!("locblur: {m}");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
