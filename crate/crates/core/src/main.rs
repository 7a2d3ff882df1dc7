use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spsa_fs::experiment::{emit_trace, read_result, render_table, run_experiment, write_outputs, ExperimentConfig};

#[derive(Parser)]
#[command(name = "spsa-fs", version, about = "Wrapper feature selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (dataset, classifier, method) cell of a config.
    Run {
        config: PathBuf,
        /// Override the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Export the trace of a saved cell result as CSV.
    Trace { result: PathBuf, out: PathBuf },
}

const CONFIG_ERROR: u8 = 1;
const RUNTIME_FAILURE: u8 = 2;

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("invalid config {}:\n{e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                println!(
                    "ok: {} dataset(s) x {} classifier(s) x {} method(s)",
                    c.datasets.len(),
                    c.classifiers.len(),
                    c.methods.len()
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, seed } => {
            let mut c = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                c.master_seed = seed;
            }
            let report = run_experiment(&c, |cell| {
                let status = match (&cell.error, cell.mean) {
                    (Some(e), _) => format!("FAILED: {e}"),
                    (None, Some(m)) => format!("{} = {m:.4}", cell.metric),
                    (None, None) => String::new(),
                };
                eprintln!(
                    "[{:>8.1}s] {}/{}/{}: {status}",
                    cell.wall_seconds, cell.dataset, cell.classifier, cell.method
                );
            });
            if let Err(e) = write_outputs(&report, &c.output_dir) {
                eprintln!("cannot write results to {}: {e}", c.output_dir.display());
                return ExitCode::from(RUNTIME_FAILURE);
            }
            print!("{}", render_table(&report));
            println!("results written to {}", c.output_dir.display());
            if report.failed_cells() > 0 {
                ExitCode::from(RUNTIME_FAILURE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Trace { result, out } => {
            let outcome = read_result(&result).and_then(|r| emit_trace(&r, &out));
            match outcome {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("cannot export trace: {e}");
                    ExitCode::from(RUNTIME_FAILURE)
                }
            }
        }
    }
}
