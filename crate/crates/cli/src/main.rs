use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dyadic::experiments::{run, validate, ExperimentConfig, EXPERIMENTS};

const EXIT_INVALID: u8 = 2;
const EXIT_BREACH: u8 = 3;

#[derive(Parser)]
#[command(name = "dyadic", version, about = "Dyadic multiplier and rough-kernel experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `[output] dir`, default `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Static feasibility check of a config, without computing.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the registered experiments.
    ListExperiments,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path).with_context(|| format!("reading config {}", path.display()))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for (name, about) in EXPERIMENTS {
                println!("{name:<24}{about}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let rep = validate(&cfg);
            for n in &rep.notes {
                println!("note: {n}");
            }
            for e in &rep.errors {
                println!("error: {e}");
            }
            if rep.ok {
                println!("{}: feasible", cfg.experiment);
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INVALID))
            }
        }
        Command::Run { config, out, workers } => {
            let cfg = load(&config)?;
            let rep = validate(&cfg);
            if let Some(e) = rep.errors.iter().find(|e| !e.contains("is infeasible")) {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(EXIT_INVALID));
            }
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?;
            let output = pool.install(|| run(&cfg)).with_context(|| format!("running {}", cfg.experiment))?;
            let dir = out.or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            for p in output.write(&dir)? {
                println!("wrote {}", p.display());
            }
            let breaches = output.table.breaches();
            for b in &breaches {
                eprintln!("threshold breach [{}] {} {}: {:e}", b.check, b.parameters, b.quantity, b.value);
            }
            Ok(if breaches.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_BREACH) })
        }
    }
}
