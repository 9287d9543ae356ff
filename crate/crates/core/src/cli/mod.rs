//! Batch front end: `komatsu spectra|classify|tensor|verify`.

mod commands;
pub mod config;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::RunConfig;

use crate::error::Result;
use crate::io::{to_json_string, write_json};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_UNRESOLVED_INPUT: i32 = 3;
pub const EXIT_ALIASED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "komatsu", version, about = "Eigenfunction expansions and weight-class diagnostics on S^1, T^2 and S^2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Keep going when the tensor alias guard trips.
    #[arg(long, global = true)]
    pub allow_alias: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Model descriptor plus Weyl, summability and sup-norm diagnostics.
    Spectra,
    /// Decay-class envelopes of the configured input.
    Classify,
    /// Tensor of the configured operator with adjointness and multiplier reports.
    Tensor,
    /// Every module's invariant suite at config scale.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectra => "spectra",
            Command::Classify => "classify",
            Command::Tensor => "tensor",
            Command::Verify => "verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

impl Criterion {
    pub fn new(id: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Criterion { id: id.into(), pass, detail: detail.into() }
    }

    /// Not applicable at this scale; counts as a pass.
    pub fn skipped(id: impl Into<String>, why: impl std::fmt::Display) -> Self {
        Criterion { id: id.into(), pass: true, detail: format!("skipped: {why}") }
    }
}

#[derive(Serialize)]
struct Report<'a, B: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    seed: u64,
    criteria: &'a [Criterion],
    body: &'a B,
}

pub(crate) struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub allow_alias: bool,
    /// Directory against which relative input paths are resolved.
    pub base_dir: PathBuf,
    config_hash: String,
}

impl Context {
    fn new(config: RunConfig, config_path: Option<&Path>, cli: &Cli) -> Result<Self> {
        let out_dir = cli.out.clone().or_else(|| config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&out_dir)?;
        let base_dir = config_path.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
        let mut h = Sha256::new();
        h.update(to_json_string(&config)?.as_bytes());
        h.update(format!("seed={}", cli.seed).as_bytes());
        let config_hash = hex::encode(h.finalize());
        Ok(Context { config, seed: cli.seed, out_dir, allow_alias: cli.allow_alias, base_dir, config_hash })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// A finished command: the JSON report and the process exit code.
pub(crate) struct Outcome {
    pub json: String,
    pub criteria: Vec<Criterion>,
    pub exit: i32,
}

pub(crate) fn finish<B: Serialize>(
    ctx: &Context,
    command: &str,
    criteria: Vec<Criterion>,
    body: &B,
    exit: i32,
) -> Result<Outcome> {
    let report = Report { command, config_hash: &ctx.config_hash, seed: ctx.seed, criteria: &criteria, body };
    write_json(&ctx.out(&format!("{command}_report.json")), &report)?;
    Ok(Outcome { json: to_json_string(&report)?, criteria, exit })
}

fn configure_threads() {
    if let Some(n) = std::env::var("KOMATSU_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists, which keeps that pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let config = match (&cli.config, cli.command) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Command::Verify) => RunConfig::default_verify(),
        (None, _) => {
            return Err(crate::Error::InvalidArgument(format!("{} needs --config PATH", cli.command.name())))
        }
    };
    let ctx = Context::new(config, cli.config.as_deref(), cli)?;
    match cli.command {
        Command::Spectra => commands::spectra(&ctx),
        Command::Classify => commands::classify(&ctx),
        Command::Tensor => commands::tensor(&ctx),
        Command::Verify => verify::verify(&ctx),
    }
}

/// Runs the parsed command line and returns the exit code. The report goes to
/// stdout, a one-line-per-criterion summary to stderr.
pub fn run(cli: &Cli) -> i32 {
    configure_threads();
    match execute(cli) {
        Ok(out) => {
            print!("{}", out.json);
            for c in &out.criteria {
                eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.detail);
            }
            out.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
