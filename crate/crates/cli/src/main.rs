use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tsvf_cli::config::{load_config, read_config, ScenarioKind};
use tsvf_cli::report::{emit_report, Format};

#[derive(Parser)]
#[command(name = "tsvf", version, about = "Run two-state-vector scenarios from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and print its report.
    Run {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write data here and metadata to `<out>.meta`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Worker threads for parallel kernels.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List the scenario kinds.
    ListScenarios,
}

const EXIT_INVALID: u8 = 1;
const EXIT_FAILED: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<24} {}", k.name(), k.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config) {
            Ok((_, notes)) => {
                for n in notes {
                    println!("note: {n}");
                }
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(EXIT_INVALID)
            }
        },
        Command::Run { config, seed, out, format, jobs } => {
            let mut cfg = match read_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(EXIT_INVALID);
                }
            };
            if seed.is_some() {
                cfg.seed = seed;
            }
            let threads = jobs.unwrap_or(0);
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_FAILED);
                }
            };
            let report = match pool.install(|| tsvf_cli::run(&cfg)) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(EXIT_INVALID);
                }
            };
            let out = out.or_else(|| cfg.output.clone());
            if let Err(e) = emit_report(&report, format, out.as_deref()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAILED);
            }
            if let Some(e) = &report.error {
                eprintln!("error: {e}");
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
