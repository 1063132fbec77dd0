//! `hiagg` command line: validate, aggregate, compare, synth, chart.
//!
//! Exit codes: 0 ok, 1 hard data or schema error, 2 quality threshold
//! exceeded, 3 bad usage, 4 I/O failure on an input or output path.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    bias_diagnostics, build_report, emit_chart, emit_report, write_output, AnalysisError,
    ComparisonReport, ReportFormat, DEFAULT_PERCENTILE_GAP,
};
use crate::catalog::Catalogs;
use crate::ingest::{audit_fleet, fleet_to_string, parse_catalogs, parse_fleet, IngestError};
use crate::model::{Method, Normalization, StrategyConfig, Substation};
use crate::synthgen::{generate_fleet, FleetSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_QUALITY: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hiagg", version, about = "Aggregate asset Health Index scores to bay and substation level")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit a fleet file; exits 2 when the invalid fraction exceeds the threshold.
    Validate(ValidateArgs),
    /// Score every bay under a single method.
    Aggregate(AggregateArgs),
    /// Score every bay under several methods and compare them.
    Compare(CompareArgs),
    /// Generate a synthetic fleet file.
    Synth(SynthArgs),
    /// Render a chart from a JSON report.
    Chart(ChartArgs),
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    /// Catalog document (TOML); built-in defaults when omitted.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long, default_value = "normalized", value_parser = ["raw", "normalized"])]
    pub normalization: String,
    #[arg(long = "cap-offset", default_value_t = 3)]
    pub cap_offset: u32,
    #[arg(long = "power-exponent", default_value_t = -2.0, allow_negative_numbers = true)]
    pub power_exponent: f64,
    #[arg(long = "invalid-threshold", default_value_t = 0.25)]
    pub invalid_threshold: f64,
    /// Worker threads for per-bay aggregation; output does not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write the audit here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long = "invalid-threshold", default_value_t = 0.25)]
    pub invalid_threshold: f64,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "method", visible_alias = "methods", default_value = "weighted_avg")]
    pub method: String,
    #[arg(long, default_value = "json")]
    pub format: String,
    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated: weighted_avg, fmeca, replacement_cost, failure_interp.
    #[arg(long, default_value = "weighted_avg,fmeca")]
    pub methods: String,
    #[arg(long, default_value = "json")]
    pub format: String,
    /// Also write an SVG chart here.
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Also write small-bay bias diagnostics (JSON) here.
    #[arg(long)]
    pub bias: Option<PathBuf>,
    #[arg(long = "bias-gap", default_value_t = DEFAULT_PERCENTILE_GAP)]
    pub bias_gap: f64,
    #[command(flatten)]
    pub strategy: StrategyArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Fleet spec (TOML, or JSON when the extension is .json); defaults when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    /// JSON report produced by `compare` or `aggregate`.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
    fn data(message: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: message.into() }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::Io { .. } | IngestError::Write(_) => EXIT_IO,
            _ => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match e {
            AnalysisError::UnwritableOutput { .. } => EXIT_IO,
            AnalysisError::NoMethods => EXIT_USAGE,
            AnalysisError::Aggregation(_) => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

fn emit(out: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => write_output(p, contents).map_err(Failure::from),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Failure { code: EXIT_IO, message: format!("stdout: {e}") }),
    }
}

fn check_fraction(flag: &str, v: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Failure::usage(format!("{flag} must lie in [0, 1], got {v}")))
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, Failure> {
    s.parse().map_err(|e: String| Failure::usage(format!("--format: {e}")))
}

fn parse_methods(flag: &str, s: &str) -> Result<Vec<Method>, Failure> {
    let mut methods = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: Method = part.parse().map_err(|e| Failure::usage(format!("{flag}: {e}")))?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        return Err(Failure::usage(format!("{flag}: no methods given")));
    }
    Ok(methods)
}

impl StrategyArgs {
    fn config(&self) -> Result<StrategyConfig<f64>, Failure> {
        check_fraction("--invalid-threshold", self.invalid_threshold)?;
        let cfg = StrategyConfig {
            method: Method::WeightedAverage,
            normalization: self
                .normalization
                .parse::<Normalization>()
                .map_err(|e| Failure::usage(format!("--normalization: {e}")))?,
            worst_case_cap_offset: self.cap_offset,
            power_mean_exponent: self.power_exponent,
            invalid_fraction_threshold: self.invalid_threshold,
        };
        cfg.validate()
            .map_err(|e| Failure::usage(format!("--power-exponent: {e}")))?;
        if self.workers == Some(0) {
            return Err(Failure::usage("--workers must be at least 1"));
        }
        Ok(cfg)
    }

    fn catalogs(&self) -> Result<Catalogs, Failure> {
        Ok(parse_catalogs(self.catalog.as_deref())?)
    }
}

fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::usage(format!("--workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn report_for(
    subs: &[Substation],
    methods: &[Method],
    strategy: &StrategyArgs,
) -> Result<ComparisonReport, Failure> {
    let cfg = strategy.config()?;
    let catalogs = strategy.catalogs()?;
    with_workers(strategy.workers, || build_report(subs, methods, &catalogs, &cfg))?
        .map_err(Failure::from)
}

fn validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    check_fraction("--invalid-threshold", args.invalid_threshold)?;
    let catalogs = parse_catalogs(args.catalog.as_deref())?;
    let subs = parse_fleet(&args.input)?;
    let audit = audit_fleet(&subs, &catalogs);
    emit(args.out.as_deref(), &crate::analysis::emit_json_value(&audit), stdout)?;
    Ok(if audit.worst_invalid_fraction() > args.invalid_threshold {
        EXIT_QUALITY
    } else {
        EXIT_OK
    })
}

fn aggregate(args: &AggregateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let methods = parse_methods("--method", &args.method)?;
    if methods.len() != 1 {
        return Err(Failure::usage("--method: aggregate takes exactly one method"));
    }
    let format = parse_format(&args.format)?;
    args.strategy.config()?;
    let subs = parse_fleet(&args.input)?;
    let report = report_for(&subs, &methods, &args.strategy)?;
    emit(args.out.as_deref(), &emit_report(&report, format), stdout)?;
    Ok(EXIT_OK)
}

fn compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let methods = parse_methods("--methods", &args.methods)?;
    let format = parse_format(&args.format)?;
    check_fraction("--bias-gap", args.bias_gap)?;
    args.strategy.config()?;
    let subs = parse_fleet(&args.input)?;
    let report = report_for(&subs, &methods, &args.strategy)?;
    emit(args.out.as_deref(), &emit_report(&report, format), stdout)?;
    if let Some(path) = &args.chart {
        write_output(path, &emit_chart(&report))?;
    }
    if let Some(path) = &args.bias {
        let cfg = args.strategy.config()?;
        let catalogs = args.strategy.catalogs()?;
        let mut diags: Vec<_> = with_workers(args.strategy.workers, || {
            subs.iter()
                .map(|s| bias_diagnostics(s, &catalogs, &cfg, args.bias_gap))
                .collect()
        })?;
        diags.sort_by(|a: &crate::analysis::BiasReport, b| a.substation_id.cmp(&b.substation_id));
        write_output(path, &crate::analysis::emit_json_value(&diags))?;
    }
    Ok(EXIT_OK)
}

fn load_spec(path: &Path) -> Result<FleetSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| {
            Failure::data(format!("{}:{}: {e}", path.display(), e.line()))
        })
    } else {
        toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Failure::data(format!("{}:{line}: {}", path.display(), e.message()))
        })
    }
}

fn synth(args: &SynthArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut spec = match &args.spec {
        Some(p) => load_spec(p)?,
        None => FleetSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let fleet = generate_fleet(&spec).map_err(|e| Failure::data(e.to_string()))?;
    emit(args.out.as_deref(), &fleet_to_string(&fleet), stdout)?;
    Ok(EXIT_OK)
}

fn chart(args: &ChartArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", args.input.display()),
    })?;
    let report: ComparisonReport = serde_json::from_str(&text).map_err(|e| {
        Failure::data(format!("{}:{}: not a JSON report: {e}", args.input.display(), e.line()))
    })?;
    emit(args.out.as_deref(), &emit_chart(&report), stdout)?;
    Ok(EXIT_OK)
}

/// Run a parsed command line and return its exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Validate(a) => validate(a, stdout),
        Command::Aggregate(a) => aggregate(a, stdout),
        Command::Compare(a) => compare(a, stdout),
        Command::Synth(a) => synth(a, stdout),
        Command::Chart(a) => chart(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Parse `args` (program name first) and run. Usage errors exit 3; help and
/// version requests exit 0.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            }
        }
    }
}
