use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use infground_cli::config::parse_checks;
use infground_cli::{parse, pipeline, report};

#[derive(Parser)]
#[command(name = "infground", version, about = "Infinity ground states on planar convex domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run {
        config: PathBuf,
        /// Overrides `[output] seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma list of checks, overrides `[checks] run`.
        #[arg(long)]
        checks: Option<String>,
    },
    /// Summarize a run directory, failures first.
    Report { dir: PathBuf },
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, seed, out, checks } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("config error: {}: {e}", config.display());
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            let mut cfg = match parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {}: {e}", config.display());
                    return ExitCode::from(CONFIG_ERROR);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let Some(c) = checks {
                match parse_checks(&c) {
                    Ok(c) => cfg.checks = c,
                    Err(e) => {
                        eprintln!("config error: --checks: {e}");
                        return ExitCode::from(CONFIG_ERROR);
                    }
                }
            }
            let dir = pipeline::resolve_out(&cfg.out);
            match pipeline::run(&cfg, &dir) {
                Ok(outcome) => {
                    for r in &outcome.reports {
                        println!("{}", pipeline::summary_line(r));
                    }
                    println!("artifacts in {}", outcome.dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Report { dir } => match report::summarize(&dir) {
            Ok(s) => {
                print!("{}", report::render(&s));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::FAILURE
            }
        },
    }
}
