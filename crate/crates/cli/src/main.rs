use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use geofreq_cli::builtins::BUILTINS;
use geofreq_cli::matrix::{analyze_matrix, load_matrix};
use geofreq_cli::scenario::resolve;
use geofreq_cli::{run, CliError, RunOptions, RunOutcome};

#[derive(Parser)]
#[command(
    name = "geofreq",
    version,
    about = "Geometric frequency of dynamical-system trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios (builtin names or TOML files) and write CSV + summary.
    Run {
        #[arg(required = true)]
        scenarios: Vec<String>,
        /// Output directory (default: scenario setting, then $GEOFREQ_OUT, then `.`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Override the integration step.
        #[arg(long)]
        step: Option<f64>,
        /// Override the horizon.
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Omit the modal block columns.
        #[arg(long)]
        no_modal: bool,
    },
    /// Print the spectrum and real modal form of a matrix file.
    AnalyzeMatrix { file: PathBuf },
    /// List the builtin scenarios.
    List,
    /// Parse and validate scenarios without running them.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<String>,
    },
}

fn run_one(arg: &str, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let (scenario, _) = resolve(arg)?;
    run(&scenario, opts)
}

fn report(arg: &str, result: &Result<RunOutcome, CliError>) -> i32 {
    match result {
        Ok(outcome) => {
            let exec = &outcome.execution;
            for c in &exec.checks {
                println!(
                    "{} {} {}: {}",
                    exec.scenario.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            println!(
                "{}: wrote {} and {}",
                exec.scenario.name,
                outcome.csv.display(),
                outcome.summary.display()
            );
            if exec.passed() {
                0
            } else {
                2
            }
        }
        Err(e) => {
            eprintln!("error: {arg}: {e}");
            1
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenarios,
            out_dir,
            step,
            t_end,
            jobs,
            no_modal,
        } => {
            let opts = RunOptions {
                out_dir,
                step,
                t_end,
                no_modal,
            };
            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
            {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let results: Vec<_> =
                pool.install(|| scenarios.par_iter().map(|s| run_one(s, &opts)).collect());
            let codes: Vec<i32> = scenarios
                .iter()
                .zip(&results)
                .map(|(s, r)| report(s, r))
                .collect();
            if codes.contains(&1) {
                1
            } else {
                codes.into_iter().max().unwrap_or(0)
            }
        }
        Command::AnalyzeMatrix { file } => {
            match load_matrix(&file).and_then(|a| analyze_matrix(&a)) {
                Ok(text) => {
                    print!("{text}");
                    0
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::List => {
            for b in BUILTINS {
                match b.scenario() {
                    Ok(s) => println!("{:<22}{}", b.name, s.description),
                    Err(e) => println!("{:<22}invalid: {e}", b.name),
                }
            }
            0
        }
        Command::Validate { scenarios } => {
            let mut code = 0;
            for arg in &scenarios {
                match resolve(arg) {
                    Ok((s, _)) => println!("ok {arg} ({}, {})", s.name, s.system.kind()),
                    Err(e) => {
                        eprintln!("error: {e}");
                        code = 1;
                    }
                }
            }
            code
        }
    };
    ExitCode::from(code as u8)
}
