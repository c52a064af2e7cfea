use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pfaffmatch::dominating::{DEFAULT_GRID_CAP, DEFAULT_TRIALS};
use pfaffmatch::pfaffian::pfaffian;
use pfaffmatch_cli::selftest::{self, DEFAULT_SIZE_LIMIT};
use pfaffmatch_cli::{cmd_construct, cmd_decide, Outcome, RunOptions};

#[derive(Parser)]
#[command(
    name = "pfaffmatch",
    version,
    about = "Matchings and f-factors with edge-class lower bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the instance has a solution.
    Decide(RunArgs),
    /// Find a solution.
    Construct(RunArgs),
    /// Check the solver against brute force on small instances.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SIZE_LIMIT)]
        size_limit: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Defaults to a random seed, which is echoed in the report.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    grid_cap: u64,
    /// Compare the answer with exhaustive search when the instance is small.
    #[arg(long)]
    verify: bool,
    /// Must be prime and at least 2(n/2)^2 for n vertices in the solved graph.
    #[arg(long)]
    prime_override: Option<u64>,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            trials: self.trials,
            seed: self.seed.unwrap_or_else(rand::random),
            grid_cap: self.grid_cap,
            prime_override: self.prime_override,
            verify: self.verify,
        }
    }
}

fn finish(out: Outcome) -> ExitCode {
    for d in &out.diagnostics {
        eprintln!("{d}");
    }
    if let Some(r) = &out.report {
        println!("{}", r.to_json());
    }
    ExitCode::from(out.exit_code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Decide(args) => finish(cmd_decide(&args.file, &args.options())),
        Command::Construct(args) => finish(cmd_construct(&args.file, &args.options())),
        Command::Selftest { size_limit, seed } => {
            let seed = seed.unwrap_or_else(rand::random);
            println!("seed {seed}, size limit {size_limit}");
            let results = selftest::run_all(pfaffian, size_limit, seed);
            for r in &results {
                println!(
                    "{:<16} {:>7} passed {:>5} failed{}",
                    r.name,
                    r.passed,
                    r.failed,
                    r.first_failure
                        .as_deref()
                        .map(|f| format!("  ({f})"))
                        .unwrap_or_default()
                );
            }
            if results.iter().all(|r| r.ok()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
