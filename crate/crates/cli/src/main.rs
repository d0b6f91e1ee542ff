mod commands;
mod config;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use commands::{Check, Output};
use config::{load_value, parse, MarkersConfig, NormalityConfig, DEFAULT_SEED};

/// Generic points and lifts on subshifts of finite type.
///
/// Exit status: 0 on success, 1 on input or configuration errors, 2 when a
/// configured tolerance is not met.
#[derive(Parser)]
#[command(name = "genlift", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON configuration, or a report written by an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream; defaults to the report's seed, then 0xD0D0.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Depth of the weak* metric.
    #[arg(long, global = true)]
    depth: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Cmd {
    /// Lift a point along a joining.
    Lift,
    /// Turn a quasi-generic point into a generic one.
    Genericize,
    /// Build a point with oscillating ergodic averages.
    Oscillate,
    /// Check two-gap marker sequences.
    Markers,
    /// Run the selection and normality experiments.
    Normality,
    /// Run every entry of a manifest.
    Suite,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Lift => "lift",
            Cmd::Genericize => "genericize",
            Cmd::Oscillate => "oscillate",
            Cmd::Markers => "markers",
            Cmd::Normality => "normality",
            Cmd::Suite => "suite",
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

enum Status {
    Passed,
    ToleranceFailure,
}

/// Runs one non-suite command with an optional JSON configuration.
fn run(
    cmd: Cmd,
    value: Option<serde_json::Value>,
    dir: &Path,
    seed: u64,
    depth: Option<usize>,
    out: &Path,
) -> Result<Vec<Check>> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let output = Output {
        dir: out,
        command: cmd.name(),
        seed,
    };
    let required = || value.clone().with_context(|| format!("{} needs --config", cmd.name()));
    match cmd {
        Cmd::Lift => commands::lift(parse(required()?, dir)?, depth, &output),
        Cmd::Genericize => commands::genericize_cmd(parse(required()?, dir)?, depth, &output),
        Cmd::Oscillate => commands::oscillate(parse(required()?, dir)?, &output),
        Cmd::Markers => {
            let cfg = match &value {
                Some(v) => parse(v.clone(), dir)?,
                None => MarkersConfig::default(),
            };
            commands::markers(cfg, depth, &output)
        }
        Cmd::Normality => {
            let cfg = match &value {
                Some(v) => parse(v.clone(), dir)?,
                None => NormalityConfig::default(),
            };
            commands::normality(cfg, depth, &output)
        }
        Cmd::Suite => bail!("suites cannot be nested"),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    runs: Vec<ManifestRun>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRun {
    name: String,
    command: Cmd,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    depth: Option<usize>,
    /// Inline configuration, or a path relative to the manifest.
    #[serde(default)]
    config: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct RunSummary {
    name: String,
    command: Cmd,
    seed: u64,
    status: &'static str,
    exit_code: u8,
    message: Option<String>,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct SuiteSummary {
    seed: u64,
    passed: usize,
    failed: usize,
    runs: Vec<RunSummary>,
}

fn suite(manifest: Option<PathBuf>, seed: u64, depth: Option<usize>, out: &Path) -> Result<u8> {
    let path = manifest.context("suite needs --config pointing at a manifest")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
    let mut names = BTreeSet::new();
    for r in &manifest.runs {
        if r.command == Cmd::Suite {
            bail!("manifest run {:?}: suites cannot be nested", r.name);
        }
        if r.name.is_empty() || r.name.contains(['/', '\\']) || r.name.starts_with('.') {
            bail!("manifest run name {:?} is not a plain directory name", r.name);
        }
        if !names.insert(r.name.as_str()) {
            bail!("manifest run name {:?} appears twice", r.name);
        }
    }
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut runs = Vec::with_capacity(manifest.runs.len());
    for r in manifest.runs {
        let mut run_seed = r.seed.unwrap_or(seed);
        let result = match r.config {
            Some(serde_json::Value::String(file)) => {
                let file = dir.join(file);
                load_value(&file).and_then(|(v, report_seed)| {
                    run_seed = r.seed.or(report_seed).unwrap_or(seed);
                    let sub_dir = file.parent().unwrap_or(Path::new("."));
                    run(r.command, Some(v), sub_dir, run_seed, r.depth.or(depth), &out.join(&r.name))
                })
            }
            config => run(r.command, config, dir, run_seed, r.depth.or(depth), &out.join(&r.name)),
        };
        let (status, code, message, checks) = match result {
            Ok(checks) if checks.iter().all(|c| c.passed) => ("passed", 0, None, checks),
            Ok(checks) => ("tolerance_failure", 2, None, checks),
            Err(e) => ("input_error", 1, Some(format!("{e:#}")), Vec::new()),
        };
        eprintln!("{:<20} {status}", r.name);
        runs.push(RunSummary {
            name: r.name,
            command: r.command,
            seed: run_seed,
            status,
            exit_code: code,
            message,
            checks,
        });
    }
    let passed = runs.iter().filter(|r| r.exit_code == 0).count();
    let code = if runs.iter().any(|r| r.exit_code == 1) {
        1
    } else if runs.iter().any(|r| r.exit_code == 2) {
        2
    } else {
        0
    };
    let summary = SuiteSummary {
        seed,
        passed,
        failed: runs.len() - passed,
        runs,
    };
    let path = out.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(code)
}

fn main_inner(cli: Cli) -> Result<Status> {
    if cli.command == Cmd::Suite {
        let code = suite(cli.config, cli.seed.unwrap_or(DEFAULT_SEED), cli.depth, &cli.out)?;
        return match code {
            0 => Ok(Status::Passed),
            2 => Ok(Status::ToleranceFailure),
            _ => bail!("suite had input errors; see {}", cli.out.join("summary.json").display()),
        };
    }
    let (value, report_seed, dir) = match &cli.config {
        Some(path) => {
            let (v, s) = load_value(path)?;
            (Some(v), s, path.parent().unwrap_or(Path::new(".")).to_path_buf())
        }
        None => (None, None, PathBuf::from(".")),
    };
    let seed = cli.seed.or(report_seed).unwrap_or(DEFAULT_SEED);
    let checks = run(cli.command, value, &dir, seed, cli.depth, &cli.out)?;
    for c in &checks {
        eprintln!(
            "{} {}: {} {} {}",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.tolerance
        );
    }
    Ok(if checks.iter().all(|c| c.passed) {
        Status::Passed
    } else {
        Status::ToleranceFailure
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(Status::Passed) => ExitCode::SUCCESS,
        Ok(Status::ToleranceFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
