//! Command-line front end: config-driven experiments, canned verification
//! cases, and the operator catalogue.
//!
//! Exit codes: 0 success, 1 error (usage, config, numerical failure),
//! 2 a `verify` expectation was not met.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asymptotica::config::{ExperimentConfig, VerifyCase};
use asymptotica::runner;
use asymptotica::zoo;

#[derive(Parser)]
#[command(
    name = "asymptotica",
    version,
    about = "Numerical experiments on asymptotics of power-bounded operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        /// Path to the config (strict schema, `"schema": 1`).
        config: PathBuf,
    },
    /// Run a canned verification case with pinned defaults.
    Verify {
        #[arg(value_enum)]
        case: VerifyCase,
        /// Override the case's default dimension / grid size.
        #[arg(long)]
        dim: Option<usize>,
        /// Override the case's default horizon.
        #[arg(long)]
        horizon: Option<usize>,
        /// Output directory (default: out-<case>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator catalogue.
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
}

#[derive(Subcommand)]
enum ZooCommand {
    /// List the operator constructors accepted in configs.
    List,
}

fn init_threads() {
    if let Ok(val) = std::env::var("ASYMPTOTICA_THREADS") {
        match val.parse::<usize>() {
            Ok(n) if n > 0 => {
                // Ignore failure: the global pool may already exist.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring invalid ASYMPTOTICA_THREADS={val:?}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match cli.command {
        Command::Run { config } => {
            let cfg = match ExperimentConfig::from_path(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
            finish(runner::run(&cfg), &out)
        }
        Command::Verify {
            case,
            dim,
            horizon,
            out,
        } => {
            let cfg = ExperimentConfig {
                schema: asymptotica::config::SCHEMA_VERSION,
                experiment: asymptotica::config::ExperimentKind::Verify,
                operator: None,
                case: Some(case),
                vectors: vec![],
                horizon,
                direction: None,
                mode: None,
                bound_cap: None,
                dim,
                tolerances: Default::default(),
                output: None,
            };
            let out = out.unwrap_or_else(|| PathBuf::from(format!("out-{}", case.as_str())));
            finish(runner::run(&cfg), &out)
        }
        Command::Zoo { command } => match command {
            ZooCommand::List => {
                for name in zoo::expr::constructor_names() {
                    println!("{name}");
                }
                ExitCode::SUCCESS
            }
        },
    }
}

fn finish(result: Result<asymptotica::report::Report, runner::RunError>, out: &PathBuf) -> ExitCode {
    match result {
        Ok(report) => {
            if let Err(e) = report.write(out) {
                eprintln!("error writing report to {}: {e}", out.display());
                return ExitCode::from(1);
            }
            print!("{}", report.summary_text());
            println!("wrote {}/report.csv and {}/summary.txt", out.display(), out.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
