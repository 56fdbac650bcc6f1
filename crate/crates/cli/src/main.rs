//! `boston`: generate instances, run the mechanisms, check properties,
//! decompose fractional outcomes, audit manipulability and run experiments.
//!
//! Exit codes: 0 success, 1 a property violation under `--strict` or a
//! witness that fails to replay, 2 bad input or an exceeded size cap.

mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "boston",
    version,
    about = "Randomized Boston-style assignment mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random impartial-culture instance.
    Gen(GenArgs),
    /// Run a mechanism on an instance.
    Run(RunArgs),
    /// Check properties of an assignment, random assignment or lottery.
    Check(CheckArgs),
    /// Decompose the fractional mechanism's output into a lottery.
    Decompose(DecomposeArgs),
    /// Manipulation, neutrality and counterexample searches.
    Audit {
        #[command(subcommand)]
        audit: AuditCommand,
    },
    /// Monte Carlo experiment over a grid of sizes.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Output {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    agents: usize,
    #[arg(long)]
    items: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mechanism {
    Gebm,
    Gpbm,
    Rsdq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Sample,
    Expected,
    Lottery,
    Fractional,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    mechanism: Mechanism,
    /// Defaults to `sample` (`fractional` for gpbm).
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Items per pick for rsdq; defaults to ⌈m/n⌉.
    #[arg(long)]
    quota: Option<usize>,
    /// Fixed rsdq priority order as comma-separated agent names.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    #[arg(long, default_value_t = boston_core::mechanisms::DEFAULT_BRANCH_CAP)]
    max_branch: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Outcome file: an assignment, a random assignment, a lottery, or a
    /// document written by `run`.
    #[arg(long)]
    assignment: PathBuf,
    /// Comma-separated property names.
    #[arg(long, value_delimiter = ',', required = true)]
    properties: Vec<String>,
    /// Exit with status 1 if any verdict is false.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Also draw one realization with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Limits {
    #[arg(long, default_value_t = boston_core::mechanisms::DEFAULT_BRANCH_CAP)]
    max_branch: u64,
    #[arg(long, default_value_t = boston_core::oracle::DEFAULT_ENUMERATION_CAP)]
    max_enum: u64,
    /// Largest item count for which every strict order is tried.
    #[arg(long, default_value_t = boston_core::oracle::DEFAULT_MISREPORT_ITEMS)]
    max_misreport_items: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AuditedMechanism {
    Gebm,
    Gpbm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Sde,
    Sdef,
    Either,
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Search every unilateral misreport for a profitable one.
    Sp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        mechanism: AuditedMechanism,
        /// Only try this agent's misreport given by `--misreport`.
        #[arg(long, requires = "misreport")]
        agent: Option<String>,
        #[arg(long, value_delimiter = ',', requires = "agent")]
        misreport: Option<Vec<String>>,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the mechanism on relabeled items with the relabeled outcome.
    Neutrality {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        mechanism: AuditedMechanism,
        /// New name of each item, listed in instance item order; every
        /// permutation is tried when omitted.
        #[arg(long, value_delimiter = ',')]
        permutation: Option<Vec<String>>,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest profile on which the eager mechanism's expectation fails
    /// sd-efficiency or sd-envy-freeness.
    Remark1 {
        /// Bound on both agents and items.
        #[arg(long, default_value_t = 3)]
        max: usize,
        #[arg(long)]
        max_agents: Option<usize>,
        #[arg(long)]
        max_items: Option<usize>,
        #[arg(long, value_enum, default_value_t = Target::Either)]
        target: Target,
        #[command(flatten)]
        limits: Limits,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_branch: Option<u64>,
    #[command(flatten)]
    output: Output,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Run(args) => commands::run(args),
        Command::Check(args) => commands::check(args),
        Command::Decompose(args) => commands::decompose(args),
        Command::Audit { audit } => commands::audit(audit),
        Command::Experiment(args) => experiment::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
