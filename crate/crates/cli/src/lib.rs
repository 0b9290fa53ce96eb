//! Command-line driver: argument parsing, run manifests and exit codes.
//!
//! Exit codes: 0 pass, 1 usage or input error, 2 counterexample or failed
//! check, 3 inconclusive.

mod commands;
pub mod manifest;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

pub use commands::Outcome;
use manifest::{FileDigest, RunManifest};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "hyperlab",
    version,
    about = "Hyperbolic dynamics and fractal uncertainty experiments"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "hyperlab-out")]
    pub out: PathBuf,
    /// Worker threads for independent sweep points.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Override the command's pass/fail tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Commutator table, flow compatibility and horocyclic commutation.
    AlgebraVerify(commands::AlgebraArgs),
    /// Geodesic flow trace with the θ-coordinate of κ±.
    FlowTrace(commands::FlowTraceArgs),
    /// KAN and normaliser decompositions of random elements.
    GroupDecompose(commands::DecomposeArgs),
    /// Ball or line porosity of a set-spec file.
    PorosityCheck(commands::PorosityArgs),
    /// Porosity of chart images of a set on the circle or the 2-sphere.
    SpherePorosity(commands::SphereArgs),
    /// Masked-norm ladder from an experiment config file.
    FupScan(commands::FupArgs),
    /// Log-phase kernel ladders on the circle.
    FioSphere(commands::FioArgs),
    /// Exact word counts along an h-ladder.
    WordsCount(commands::WordsArgs),
    /// Mixed-Hessian determinant of the log phase on sphere pairs.
    HessianCheck(commands::HessianArgs),
    /// Re-run a manifest and compare output digests.
    Replay(commands::ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::AlgebraVerify(_) => "algebra-verify",
            Command::FlowTrace(_) => "flow-trace",
            Command::GroupDecompose(_) => "group-decompose",
            Command::PorosityCheck(_) => "porosity-check",
            Command::SpherePorosity(_) => "sphere-porosity",
            Command::FupScan(_) => "fup-scan",
            Command::FioSphere(_) => "fio-sphere",
            Command::WordsCount(_) => "words-count",
            Command::HessianCheck(_) => "hessian-check",
            Command::Replay(_) => "replay",
        }
    }
}

/// What a command produced.
pub struct Report {
    pub outcome: Outcome,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

/// Parses `argv` (without the program name), runs the command, writes the
/// manifest and returns the exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(
        std::iter::once("hyperlab".to_string()).chain(argv.iter().cloned()),
    ) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(&cli, &argv) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Runs a parsed command and records its manifest.
pub fn run(cli: &Cli, argv: &[String]) -> Result<Outcome> {
    if cli.workers == 0 {
        bail!("--workers must be at least 1");
    }
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let started = now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build()?;
    let report = pool.install(|| commands::dispatch(cli))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Ok(report.outcome);
    }
    let manifest = RunManifest {
        tool: "hyperlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        argv: argv.to_vec(),
        seed: cli.seed,
        workers: cli.workers,
        config: serde_json::to_string(cli)?,
        started,
        finished: now(),
        exit_code: report.outcome.code(),
        inputs: digests(&report.inputs)?,
        outputs: digests(&report.outputs)?,
    };
    manifest.write(&cli.out)?;
    Ok(report.outcome)
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths.iter().map(|p| FileDigest::of(p)).collect()
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Re-runs `manifest` with outputs in `out` and compares digests by file name.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<(bool, Vec<String>)> {
    let m = RunManifest::read(manifest_path)?;
    for input in &m.inputs {
        let now = FileDigest::of(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            bail!("input {} changed since the recorded run", input.path);
        }
    }
    let mut argv = m.argv.clone();
    argv.push("--out".into());
    argv.push(out.display().to_string());
    let cli =
        Cli::try_parse_from(std::iter::once("hyperlab".to_string()).chain(argv.iter().cloned()))
            .context("recorded arguments no longer parse")?;
    if matches!(cli.command, Command::Replay(_)) {
        bail!("refusing to replay a replay");
    }
    run(&cli, &argv)?;
    let fresh = RunManifest::read(&out.join(manifest::MANIFEST_NAME))?;
    let mut lines = Vec::new();
    let mut same = fresh.outputs.len() == m.outputs.len();
    for old in &m.outputs {
        let name = old.file_name();
        match fresh.outputs.iter().find(|f| f.file_name() == name) {
            Some(f) if f.sha256 == old.sha256 => lines.push(format!("identical {name}")),
            Some(_) => {
                same = false;
                lines.push(format!("differs {name}"));
            }
            None => {
                same = false;
                lines.push(format!("missing {name}"));
            }
        }
    }
    Ok((same, lines))
}
