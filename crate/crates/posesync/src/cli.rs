//! The `posealign` command line.
//!
//! Exit status is 0 on success, 1 for bad arguments or input files and 2
//! when two sequences share no comparable frame pair.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use posealign_core::{
    build_cost_matrix, dtw_align_banded, run_scenario_suite, synth_sequence, MetricConfig, Motion,
    PoseSequence,
};

use crate::alignment::{alignment_to_string, load_alignment, path_csv};
use crate::config::{load_metric_config, MetricName};
use crate::format::{load_sequence, save_sequence};
use crate::plot::{cost_profile_csv, path_svg};
use crate::report::{reports_table, reports_to_json};
use crate::scenarios::{default_suite, load_scenarios, SuiteContext};

#[derive(Debug, Parser)]
#[command(
    name = "posealign",
    version,
    about = "Align pose sequences by joint angles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align a test sequence to a reference sequence.
    Align(AlignArgs),
    /// Write a synthetic keypoint sequence.
    Synth(SynthArgs),
    /// Score alignment against known perturbations of a base sequence.
    Eval(EvalArgs),
    /// Draw an alignment's warping path as SVG, with a cost profile CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    AngleMae,
    KeypointMae,
}

impl From<MetricArg> for MetricName {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::AngleMae => MetricName::AngleMae,
            MetricArg::KeypointMae => MetricName::KeypointMae,
        }
    }
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Frame cost [default: angle-mae]
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// JSON file with joint set, weights and confidence threshold.
    #[arg(long, value_name = "JSON")]
    pub metric_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long = "ref", value_name = "JSON")]
    pub reference: PathBuf,
    #[arg(long, value_name = "JSON")]
    pub test: PathBuf,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Sakoe-Chiba band half-width in frames; unconstrained when absent.
    #[arg(long, value_name = "FRAMES")]
    pub band: Option<usize>,
    /// Alignment JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the warping path as `ref,test` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// arm_wave, squat or walk_cycle
    pub motion: String,
    pub seconds: f64,
    pub fps: f64,
    /// Same as --seed.
    #[arg(value_name = "SEED")]
    pub seed_pos: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Base sequence file.
    #[arg(long = "ref", value_name = "JSON", conflicts_with = "synth")]
    pub reference: Option<PathBuf>,
    /// Synthetic base sequence as MOTION:SECONDS:FPS [default: arm_wave:8:25]
    #[arg(long, value_name = "SPEC")]
    pub synth: Option<String>,
    /// Scenario suite JSON; the built-in suite when absent.
    #[arg(long, value_name = "JSON")]
    pub scenarios: Option<PathBuf>,
    /// Frames a representative may be off by and still count as matched.
    #[arg(long, default_value_t = 2)]
    pub tolerance: usize,
    /// Seed for the synthetic base and for scenarios without their own.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Report JSON output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Alignment JSON written by `align`.
    pub alignment: PathBuf,
    /// SVG output.
    #[arg(long)]
    pub out: PathBuf,
    /// Cost profile CSV [default: --out with a .csv extension]
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Incomparable(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Incomparable(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Incomparable(m) => m,
        }
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn check_output(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::Input(format!(
            "{}: directory does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn metric_config(args: &MetricArgs) -> Result<MetricConfig, Failure> {
    let name = args.metric.map(MetricName::from);
    match &args.metric_config {
        Some(path) => load_metric_config(path, name).map_err(input),
        None => Ok(name.unwrap_or(MetricName::AngleMae).base_config()),
    }
}

macro_rules! say {
    ($quiet:expr, $out:expr, $($arg:tt)*) => {
        if !$quiet {
            let _ = writeln!($out, $($arg)*);
        }
    };
}

fn cmd_align(a: &AlignArgs, out: &mut dyn Write) -> Result<(), Failure> {
    check_output(&a.out)?;
    if let Some(csv) = &a.csv {
        check_output(csv)?;
    }
    let cfg = metric_config(&a.metric)?;
    let reference = load_sequence(&a.reference).map_err(input)?;
    let test = load_sequence(&a.test).map_err(input)?;
    let classify = |e: posealign_core::AlignError| {
        if e.is_incomparable() {
            Failure::Incomparable(format!("sequences are incomparable: {e}"))
        } else {
            input(e)
        }
    };
    let cost = build_cost_matrix(&reference, &test, &cfg).map_err(classify)?;
    let result = dtw_align_banded(&cost, a.band).map_err(classify)?;
    write_file(&a.out, &alignment_to_string(&result))?;
    if let Some(csv) = &a.csv {
        write_file(csv, &path_csv(&result.path))?;
    }
    say!(a.quiet, out, "reference frames: {}", reference.len());
    say!(a.quiet, out, "test frames: {}", test.len());
    say!(a.quiet, out, "path length: {}", result.path.len());
    say!(a.quiet, out, "total_cost: {}", result.total_cost);
    say!(a.quiet, out, "normalized_cost: {}", result.normalized_cost);
    Ok(())
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let seed = match (a.seed_pos, a.seed) {
        (Some(x), Some(y)) if x != y => {
            return Err(Failure::Input(format!("seed given twice ({x} and {y})")));
        }
        (x, y) => x.or(y).unwrap_or(0),
    };
    check_output(&a.out)?;
    let motion: Motion = a.motion.parse().map_err(input)?;
    let seq = synth_sequence(motion, a.seconds, a.fps, seed).map_err(input)?;
    save_sequence(&seq, &a.out).map_err(input)?;
    say!(
        a.quiet,
        out,
        "wrote {} frames at {} fps to {}",
        seq.len(),
        seq.fps,
        a.out.display()
    );
    Ok(())
}

fn parse_synth_spec(spec: &str, seed: u64) -> Result<PoseSequence, Failure> {
    let bad = || Failure::Input(format!("--synth expects MOTION:SECONDS:FPS, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [motion, seconds, fps] = parts.as_slice() else {
        return Err(bad());
    };
    let motion: Motion = motion.parse().map_err(input)?;
    let seconds: f64 = seconds.parse().map_err(|_| bad())?;
    let fps: f64 = fps.parse().map_err(|_| bad())?;
    synth_sequence(motion, seconds, fps, seed).map_err(input)
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(path) = &a.out {
        check_output(path)?;
    }
    let cfg = metric_config(&a.metric)?;
    let base = match (&a.reference, &a.synth) {
        (Some(path), _) => load_sequence(path).map_err(input)?,
        (None, spec) => parse_synth_spec(spec.as_deref().unwrap_or("arm_wave:8:25"), a.seed)?,
    };
    let ctx = SuiteContext {
        fps: base.fps,
        base_dir: PathBuf::from("."),
        default_seed: a.seed,
    };
    let suite = match &a.scenarios {
        Some(path) => load_scenarios(path, &ctx),
        None => default_suite(&ctx),
    }
    .map_err(input)?;
    let reports = run_scenario_suite(&base, &suite, &cfg, a.tolerance).map_err(|e| {
        if e.is_incomparable() {
            Failure::Incomparable(e.to_string())
        } else {
            input(e)
        }
    })?;
    if let Some(path) = &a.out {
        write_file(path, &reports_to_json(&reports))?;
    }
    say!(
        a.quiet,
        out,
        "base: {} ({} frames at {} fps), tolerance {} frames",
        base.source,
        base.len(),
        base.fps,
        a.tolerance
    );
    if !a.quiet {
        let _ = write!(out, "{}", reports_table(&reports));
    }
    Ok(())
}

fn cmd_plot(a: &PlotArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let csv = a.csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    check_output(&a.out)?;
    check_output(&csv)?;
    let result = load_alignment(&a.alignment).map_err(input)?;
    write_file(&a.out, &path_svg(&result))?;
    write_file(&csv, &cost_profile_csv(&result))?;
    let _ = writeln!(out, "wrote {} and {}", a.out.display(), csv.display());
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Align(a) => cmd_align(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Plot(a) => cmd_plot(a, out),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 1;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
