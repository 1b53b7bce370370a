#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use commands::{Command, Concentration, Fit, Rates, SamplePrior, SmallBall};
use config::{load, OutputRecord, Sidecar};

/// Rescaled Gaussian process priors: simulation and contraction experiments.
#[derive(Parser)]
#[command(name = "gpscale", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample prior paths on a grid.
    SamplePrior(Common),
    /// Monte Carlo small-ball probabilities.
    Smallball(Common),
    /// Concentration-function upper bounds for a truth.
    Concentration(Common),
    /// Posterior contraction summaries for one sample size.
    Fit(Common),
    /// Contraction-rate experiment over a ladder of sample sizes.
    Rates(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config, or a sidecar from an earlier run of the same command.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(anyhow::Error),
    Compute(anyhow::Error),
}

fn execute<C: Command>(args: &Common) -> Result<Vec<PathBuf>, Failure> {
    let loaded = load::<C>(&args.config, C::NAME, args.seed).map_err(Failure::Config)?;
    loaded.config.validate().map_err(Failure::Config)?;
    let dir = args
        .output
        .clone()
        .or(loaded.output_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let outputs = loaded.config.run().map_err(Failure::Compute)?;
    write_outputs::<C>(&dir, &loaded.config, outputs).map_err(Failure::Compute)
}

fn write_outputs<C: Command>(dir: &Path, config: &C, outputs: commands::Outputs) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut records = Vec::new();
    let mut written = Vec::new();
    for (name, bytes) in outputs {
        let path = dir.join(&name);
        std::fs::write(&path, &bytes)?;
        records.push(OutputRecord {
            file: name,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        written.push(path);
    }
    let sidecar = Sidecar {
        command: C::NAME.into(),
        resolved_config: serde_json::to_value(config)?,
        outputs: records,
        version: env!("CARGO_PKG_VERSION").into(),
    };
    let path = dir.join(format!("{}.json", C::NAME));
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    written.push(path);
    Ok(written)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::SamplePrior(a) => execute::<SamplePrior>(a),
        Cmd::Smallball(a) => execute::<SmallBall>(a),
        Cmd::Concentration(a) => execute::<Concentration>(a),
        Cmd::Fit(a) => execute::<Fit>(a),
        Cmd::Rates(a) => execute::<Rates>(a),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
