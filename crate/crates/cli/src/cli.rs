//! Command line front end. Every subcommand takes the same flags, named after
//! the config keys; values from `--config FILE` win over flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::experiment::{run_experiment, RunError};
use crate::report::emit_report;
use crate::sweep::sweep;

#[derive(Debug, Parser)]
#[command(name = "lyaplab", version, about = "Lyapunov exponent laboratory for z^d + c and a·e^z")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML config; its keys override the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: ExperimentConfig,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate a point and write the orbit with its log-derivative sums.
    Orbit(RunArgs),
    /// Look for an attracting cycle through the critical orbit.
    CycleDetect(RunArgs),
    /// Forward exponent series χ_n and its tails.
    Lyapunov(RunArgs),
    /// Backward orbit of the critical point under a branch policy.
    Backward(RunArgs),
    /// Slow-recurrence test against the critical point or value.
    Slowrec(RunArgs),
    /// Pliss times of a real sequence.
    Pliss(RunArgs),
    /// λ-hyperbolic times of an orbit.
    Hyptimes(RunArgs),
    /// Shadows S(j, K) and the set A(N, K).
    Shadows(RunArgs),
    /// Density of hyperbolic times in A(N, K0) with criticality counts.
    DensityReport(RunArgs),
    /// First-entry derivative bound campaign.
    ReturnBound(RunArgs),
    /// Closest-return derivative bound campaign.
    CloseReturn(RunArgs),
    /// The series F(t) = 1 + Σ t^n / Df^n(c) and a zero scan.
    Fredholm(RunArgs),
    /// Monte-Carlo area of E_n.
    AreaScan(RunArgs),
    /// Escape-time porosity probe.
    Porosity(RunArgs),
    /// Run one experiment kind over a list of values of one key.
    Sweep(RunArgs),
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        use Command::*;
        match self {
            Orbit(a) => (ExperimentKind::Orbit, a),
            CycleDetect(a) => (ExperimentKind::CycleDetect, a),
            Lyapunov(a) => (ExperimentKind::Lyapunov, a),
            Backward(a) => (ExperimentKind::Backward, a),
            Slowrec(a) => (ExperimentKind::Slowrec, a),
            Pliss(a) => (ExperimentKind::Pliss, a),
            Hyptimes(a) => (ExperimentKind::Hyptimes, a),
            Shadows(a) => (ExperimentKind::Shadows, a),
            DensityReport(a) => (ExperimentKind::DensityReport, a),
            ReturnBound(a) => (ExperimentKind::ReturnBound, a),
            CloseReturn(a) => (ExperimentKind::CloseReturn, a),
            Fredholm(a) => (ExperimentKind::Fredholm, a),
            AreaScan(a) => (ExperimentKind::AreaScan, a),
            Porosity(a) => (ExperimentKind::Porosity, a),
            Sweep(a) => (ExperimentKind::Sweep, a),
        }
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID_CONFIG: u8 = 2;

/// Merges flags and file into the effective config. Relative paths inside
/// a config file resolve against its directory.
pub fn resolve(kind: ExperimentKind, args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), RunError> {
    let mut flags = args.flags.clone();
    flags.kind = Some(kind);
    let Some(path) = &args.config else {
        return Ok((flags, PathBuf::from(".")));
    };
    let file = ExperimentConfig::from_file(path)?;
    if let Some(k) = file.kind {
        if k != kind {
            return Err(crate::config::ConfigError::InvalidField {
                field: "kind",
                reason: format!("config says `{}` but the subcommand is `{}`", k.name(), kind.name()),
            }
            .into());
        }
    }
    let base = path.parent().map(Path::to_owned).unwrap_or_else(|| PathBuf::from("."));
    Ok((flags.overridden_by(&file)?, base))
}

pub fn run_from_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID_CONFIG),
            };
        }
    };
    let (kind, args) = cli.command.split();
    match execute(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(e)) => {
            eprintln!("invalid config: {e}");
            ExitCode::from(EXIT_INVALID_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn execute(kind: ExperimentKind, args: &RunArgs) -> Result<(), RunError> {
    let (config, base) = resolve(kind, args)?;
    config.validate()?;
    let out_dir = config.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let records = if kind == ExperimentKind::Sweep {
        let points = sweep(&config, &base)?;
        let failed = points.iter().filter(|p| p.outcome.is_err()).count();
        say(format_args!("sweep: {} points, {} failed", points.len(), failed));
        points.into_iter().filter_map(|p| p.outcome.ok()).collect()
    } else {
        let record = run_experiment(&config, &base)?;
        let verdict = serde_json::to_value(record.verdict).expect("serializable");
        say(format_args!("verdict: {}", verdict.as_str().unwrap_or("?")));
        say(format_args!("{}", serde_json::to_string_pretty(&record.summary).expect("serializable")));
        vec![record]
    };
    write_sidecar_log(&out_dir, kind);
    if !records.is_empty() {
        if let Err(e) = emit_report(&records, &out_dir) {
            eprintln!("report: {e}");
        }
    }
    Ok(())
}

/// Prints a line, ignoring closed pipes.
fn say(args: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout().lock(), "{args}");
}

/// Timestamps live only here, never in results or CSV files.
fn write_sidecar_log(dir: &Path, kind: ExperimentKind) {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = std::fs::write(dir.join("run.log"), format!("{} unix={secs}\n", kind.name()));
}
