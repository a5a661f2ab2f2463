//! Command-line front end: config parsing, experiment orchestration,
//! manifests and data/plot emission.
//!
//! Exit codes: 0 pass, 1 condition or verdict failure, 2 config error,
//! 3 precondition refusal.

mod commands;
pub mod config;
mod manifest;

pub use config::{
    ConditionsSection, EquationSection, Expect, ExperimentSection, GridSection, GronwallSection, InitialSection,
    NoiseSection, RunConfig, SimulateSection,
};
pub use manifest::{config_hash, OutputDir, RunManifest};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::conditions::ConditionError;
use crate::solver::SolverError;
use crate::verify::VerifyError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition refused: {0}")]
    Precondition(String),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Runtime(_) => EXIT_FAIL,
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Precondition(m) => CliError::Precondition(m),
            VerifyError::Invalid(m) => CliError::Config(m),
            VerifyError::Solver(SolverError::Config(m)) => CliError::Config(m),
            VerifyError::Condition(c) => c.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<ConditionError> for CliError {
    fn from(e: ConditionError) -> Self {
        match e {
            ConditionError::Invalid(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spdekit", version, about = "Spectral-Galerkin SPDE simulator, condition auditor and Monte-Carlo harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the structural conditions of the configured equation.
    Check(CommonArgs),
    /// Simulate one or more sample paths.
    Simulate(CommonArgs),
    /// Run the configured Monte-Carlo experiment.
    Experiment(CommonArgs),
    /// Run the stochastic Gronwall harness.
    Gronwall(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the configured path count.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub plot: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Simulate(_) => "simulate",
            Command::Experiment(_) => "experiment",
            Command::Gronwall(_) => "gronwall",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Check(a) | Command::Simulate(a) | Command::Experiment(a) | Command::Gronwall(a) => a,
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let args = cli.command.args();
    let text = match std::fs::read(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match std::str::from_utf8(&text).map_err(|e| CliError::Config(e.to_string())).and_then(RunConfig::from_toml) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return e.exit_code();
        }
    };
    let mut overrides = BTreeMap::new();
    if let Some(s) = args.seed {
        cfg.seed = s;
        overrides.insert("seed".to_string(), s.to_string());
    }
    if let Some(p) = args.paths {
        overrides.insert("paths".to_string(), p.to_string());
    }
    let out_dir = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| {
        let stem = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
        PathBuf::from("out").join(stem)
    });
    let mut out = match OutputDir::create(&out_dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Check(_) => commands::check(&cfg, &mut out),
        Command::Simulate(a) => commands::simulate(&cfg, a, &mut out),
        Command::Experiment(a) => commands::experiment(&cfg, a, &mut out),
        Command::Gronwall(a) => commands::gronwall(&cfg, a, &mut out),
    };
    let (code, verdicts) = match result {
        Ok(v) => {
            let code = if v.values().all(|s| s != "fail") { EXIT_PASS } else { EXIT_FAIL };
            (code, v)
        }
        Err(e) => {
            eprintln!("{e}");
            let mut v = BTreeMap::new();
            v.insert("error".to_string(), e.to_string());
            (e.exit_code(), v)
        }
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        config_path: args.config.display().to_string(),
        config_hash: config_hash(&text),
        seed: cfg.seed,
        overrides,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        verdicts,
        outputs: out.written().to_vec(),
        exit_code: code,
    };
    if let Err(e) = out.write_json("manifest.json", &manifest) {
        eprintln!("{e}");
        return e.exit_code();
    }
    eprintln!("[{}] exit {code}, outputs in {}", manifest.command, out.root().display());
    code
}

#[cfg(test)]
mod tests;
