use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use symlab::experiment::{self, ExperimentConfig};
use symlab::Error;

#[derive(Parser)]
#[command(
    name = "symbol-lab",
    version,
    about = "Spectral experiments on Toeplitz and domain-restricted matrix families"
)]
struct Cli {
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Largest matrix size allowed (overrides `budget`).
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// List catalog entries.
    List { what: Listing },
    /// Show metadata for a symbol, experiment or bank.
    Describe { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Listing {
    Symbols,
    Experiments,
    Banks,
}

fn fail(e: &Error) -> ExitCode {
    let failure = json!({ "failures": [{ "name": "error", "passed": false, "detail": e.to_string() }] });
    eprintln!("{failure}");
    ExitCode::from(2)
}

fn run(cli: &Cli, path: &Path) -> Result<ExitCode, Error> {
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(dir) = &cli.out {
        config.output_dir = Some(dir.clone());
    }
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if let Some(b) = cli.budget {
        config.budget = b;
    }
    let out = config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let summary = experiment::run(&config, &out)?;
    for c in &summary.checks {
        println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} files to {}", summary.files.len(), summary.out_dir.display());
    if summary.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{}", summary.failures_json());
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => run(&cli, config),
        Command::List { what } => {
            let key = match what {
                Listing::Symbols => "symbols",
                Listing::Experiments => "experiments",
                Listing::Banks => "banks",
            };
            experiment::list(key).map(|lines| {
                lines.iter().for_each(|l| println!("{l}"));
                ExitCode::SUCCESS
            })
        }
        Command::Describe { name } => experiment::describe(name).map(|d| {
            println!("{d}");
            ExitCode::SUCCESS
        }),
    };
    result.unwrap_or_else(|e| fail(&e))
}
