//! `rgue`: run kernel, sampling and asymptotics experiments from JSON configs.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Artifact;
use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rgue", version, about = "Rising GUE kernels, samplers and asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a correlation kernel on a grid.
    EvalKernel(Common),
    /// Draw replicas from a random-matrix or interlacing model.
    Sample(Common),
    /// Estimate binned correlation functions and the kernel prediction.
    Corr(Common),
    /// Distance of the rescaled kernel to its bulk limit as the horizon grows.
    Converge(Common),
    /// Critical points of the action for semicircle-quantile configurations.
    Saddle(Common),
    /// Run the identity suite and write a JSON report.
    Verify(Common),
    /// Distance of rescaled lozenge-tiling kernels to the limit kernel.
    Tiling(Common),
    /// Compare GUE and Wigner correlation functions.
    CompareWigner(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "MK_THREADS")]
    threads: Option<usize>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::EvalKernel(c) => ("eval-kernel", c),
            Command::Sample(c) => ("sample", c),
            Command::Corr(c) => ("corr", c),
            Command::Converge(c) => ("converge", c),
            Command::Saddle(c) => ("saddle", c),
            Command::Verify(c) => ("verify", c),
            Command::Tiling(c) => ("tiling", c),
            Command::CompareWigner(c) => ("compare-wigner", c),
        }
    }
}

fn resolve_config(name: &str, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => serde_json::from_str("{}").expect("empty config parses"),
    };
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(CliError::Config(format!("command: config is for `{c}`, not `{name}`")));
        }
    }
    cfg.command = Some(name.to_string());
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    if cfg.threads == Some(0) {
        return Err(CliError::Config("threads: must be positive".into()));
    }
    cfg.validate_quadrature()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, common) = cli.command.parts();
    let cfg = resolve_config(name, common)?;
    if let Some(n) = cfg.threads {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cfg.out.clone().unwrap_or_else(|| {
        let ext = if name == "verify" { "json" } else { "csv" };
        PathBuf::from(format!("rgue-{name}.{ext}"))
    });
    let Artifact { body, summary } = match &cli.command {
        Command::EvalKernel(_) => commands::eval_kernel(&cfg)?,
        Command::Sample(_) => commands::sample(&cfg)?,
        Command::Corr(_) => commands::corr(&cfg)?,
        Command::Converge(_) => commands::converge(&cfg)?,
        Command::Saddle(_) => commands::saddle(&cfg)?,
        Command::Verify(_) => commands::verify(&cfg)?,
        Command::Tiling(_) => commands::tiling(&cfg)?,
        Command::CompareWigner(_) => commands::compare_wigner(&cfg)?,
    };
    let resolved = serde_json::to_value(&cfg).expect("config serializes");
    let failed = summary.get("all_pass") == Some(&serde_json::Value::Bool(false));
    output::write_with_sidecar(&out, body.as_bytes(), &resolved, summary)?;
    eprintln!("wrote {}", out.display());
    if failed {
        return Err(CliError::ChecksFailed(format!("some checks failed; see {}", out.display())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
