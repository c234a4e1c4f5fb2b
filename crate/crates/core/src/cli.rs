//! The `misre` command line: `fit`, `synth` and `bench`.
//!
//! Exit codes: 0 on success, 1 when estimation or a benchmark fails, 2 for
//! usage errors (bad flags, unknown scenario, invalid configuration) and 3
//! when an input file cannot be read or parsed or an output cannot be written.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{format_report, run_bench, BenchConfig};
use crate::data::{
    format_table, generate, read_covariances, read_points, write_labels, write_points, write_result, write_svg, Preset,
    ScenarioSpec, SvgOptions,
};
use crate::error::MisreError;
use crate::mode::InlierRule;
use crate::model::{InputPoint, ModelKind};
use crate::pipeline::{run, EstimationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "misre", version, about = "Robust estimation of multiple inlier structures")]
pub struct Cli {
    /// Worker threads; all available cores when absent.
    #[arg(long, global = true, env = "MISRE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment a point file into structures.
    Fit(FitArgs),
    /// Generate a labeled synthetic dataset.
    Synth(SynthArgs),
    /// Repeated generate-and-fit runs with recovery statistics.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Trajectory,
    Threshold,
}

impl From<Rule> for InlierRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Trajectory => InlierRule::Trajectory,
            Rule::Threshold => InlierRule::Threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Ransac,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,
    /// CSV (or ascii PLY for 3D models) with one point per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Random elemental subsets per iteration.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Percent of the remaining points in the initial set.
    #[arg(long, default_value_t = 5.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result document (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// SVG overlay of the structures.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// SVG view box `x,y,width,height` for 2D models.
    #[arg(long, value_parser = parse_view)]
    pub view: Option<ViewBox>,
    /// Show only the `k` strongest structures in the table.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Covariance bases, one row-major matrix per row or one shared row.
    #[arg(long)]
    pub covariances: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Rule::Trajectory)]
    pub inlier_rule: Rule,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Preset name or a JSON scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point CSV.
    #[arg(long)]
    pub output: PathBuf,
    /// Label file, one label per point with `-1` for outliers. Defaults to
    /// the output path with a `.labels` extension.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Preset name or a JSON scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Trials per iteration; the preset's default when absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 5.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, requires = "ransac_threshold")]
    pub baseline: Option<Baseline>,
    /// Inlier threshold of the baseline, in input units.
    #[arg(long, requires = "baseline")]
    pub ransac_threshold: Option<f64>,
    /// Report document (JSON).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Rule::Trajectory)]
    pub inlier_rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewBox(pub [f64; 4]);

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = ModelKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown model '{s}', expected one of {}", names.join(", "))
    })
}

fn parse_view(s: &str) -> Result<ViewBox, String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v.as_slice() {
        [x, y, w, h] if *w > 0.0 && *h > 0.0 => Ok(ViewBox([*x, *y, *w, *h])),
        _ => Err("expected x,y,width,height with positive size".into()),
    }
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<MisreError> for CliError {
    fn from(e: MisreError) -> Self {
        let code = match e {
            MisreError::InvalidConfig(_) => EXIT_USAGE,
            MisreError::Io(_) | MisreError::Parse { .. } | MisreError::Json(_) => EXIT_IO,
            _ => EXIT_FAILURE,
        };
        CliError { code, message: e.to_string() }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn scenario(name: &str, seed: u64) -> Result<(ScenarioSpec, Option<Preset>), CliError> {
    if let Ok(preset) = name.parse::<Preset>() {
        return Ok((preset.spec(seed), Some(preset)));
    }
    let path = Path::new(name);
    if !path.is_file() {
        let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        return Err(CliError::usage(format!(
            "unknown scenario '{name}': not a file and not one of {}",
            names.join(", ")
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let spec: ScenarioSpec = serde_json::from_str(&text).map_err(|e| io_error(path, e))?;
    spec.validate().map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok((spec.with_seed(seed), None))
}

fn read_input(args: &FitArgs) -> Result<Vec<InputPoint>, CliError> {
    let l = args.model.spec().input_dim;
    let points = read_points(&args.input, l).map_err(|e| match e {
        MisreError::InvalidInput(m) => CliError::usage(format!("{}: {m}", args.input.display())),
        e => io_error(&args.input, e),
    })?;
    let Some(path) = &args.covariances else {
        return Ok(points);
    };
    let bases = read_covariances(path, l, points.len()).map_err(|e| io_error(path, e))?;
    points
        .into_iter()
        .zip(bases)
        .map(|(p, c)| InputPoint::with_covariance(p.y, c))
        .collect::<Result<_, _>>()
        .map_err(|e| io_error(path, e))
}

pub fn cmd_fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let config = EstimationConfig::new(args.model)
        .trials(args.trials as usize)
        .epsilon(args.epsilon)
        .seed(args.seed)
        .inlier_rule(args.inlier_rule.into());
    config.validate()?;
    let points = read_input(args)?;
    let result = run(&points, &config)?;
    if let Some(path) = &args.output {
        write_result(&result, path).map_err(|e| io_error(path, e))?;
    }
    if let Some(path) = &args.svg {
        let opts = SvgOptions { view: args.view.map(|v| v.0), point_radius: None };
        write_svg(path, args.model, &points, &result.structures, &opts).map_err(|e| io_error(path, e))?;
    }
    write!(out, "{}", format_table(&result, args.top_k)).map_err(|e| CliError { code: EXIT_IO, message: e.to_string() })
}

pub fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, _) = scenario(&args.scenario, args.seed)?;
    let data = generate(&spec).map_err(|e| CliError::usage(e.to_string()))?;
    let labels = args.labels.clone().unwrap_or_else(|| args.output.with_extension("labels"));
    write_points(&args.output, &data.points).map_err(|e| io_error(&args.output, e))?;
    write_labels(&labels, &data.labels).map_err(|e| io_error(&labels, e))?;
    writeln!(
        out,
        "{}: {} points ({} outliers) written to {}, labels to {}",
        spec.name,
        data.points.len(),
        data.count(-1),
        args.output.display(),
        labels.display()
    )
    .map_err(|e| CliError { code: EXIT_IO, message: e.to_string() })
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (spec, preset) = scenario(&args.scenario, 0)?;
    let trials = args.trials.map(|t| t as usize).or(preset.map(Preset::default_trials)).unwrap_or(1000);
    let mut config = BenchConfig::new(spec, args.repeats as usize, trials).seed(args.seed).inlier_rule(args.inlier_rule.into());
    config.epsilon = args.epsilon;
    EstimationConfig::new(config.scenario.model).trials(trials).epsilon(args.epsilon).validate()?;
    if let Some(t) = args.ransac_threshold {
        if !(t > 0.0) {
            return Err(CliError::usage("the baseline threshold must be positive"));
        }
        config = config.baseline(t);
    }
    let report = run_bench(&config)?;
    if let Some(path) = &args.output {
        let text = serde_json::to_string_pretty(&report).map_err(|e| io_error(path, e))?;
        fs::write(path, text + "\n").map_err(|e| io_error(path, e))?;
    }
    write!(out, "{}", format_report(&report)).map_err(|e| CliError { code: EXIT_IO, message: e.to_string() })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out`, diagnostics to standard error.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: the thread count must be at least 1");
            return EXIT_USAGE;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
