use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mourre_lab::config::ExperimentConfig;
use mourre_lab::experiment;

/// Finite-volume experiments on Laurent and GGT unitaries.
#[derive(Debug, Parser)]
#[command(name = "mourre-lab", version)]
struct Cli {
    /// Experiment config (flat `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random test operators; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the plan without running it.
    #[arg(long)]
    describe: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match ExperimentConfig::from_file(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if cli.describe {
        return match experiment::describe(&cfg) {
            Ok(plan) => {
                print!("{plan}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        };
    }
    let out = cli.out.unwrap_or_else(|| cfg.output.clone());
    match experiment::run(&cfg, &out) {
        Ok(outcome) => {
            for a in &outcome.assertions {
                println!("{}", a.summary());
            }
            match outcome.first_failure() {
                None => ExitCode::SUCCESS,
                Some(a) => {
                    eprintln!("assertion failed: {}", a.key);
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
