mod commands;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::Failure;

#[derive(Debug, Parser)]
#[command(name = "afptas", version, about = "Approximation schemes for bin packing with cardinality constraints or rejection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemArg {
    Bpcc,
    Bpr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SizeDistArg {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PenaltyDistArg {
    Uniform,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Baseline {
    Exact,
    Ffd,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate {
        #[arg(long, value_enum)]
        problem: ProblemArg,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Cardinality bound (BPCC only).
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_enum, default_value = "uniform")]
        size_dist: SizeDistArg,
        #[arg(long, value_enum, default_value = "uniform")]
        penalty_dist: PenaltyDistArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scale of the small cluster of the clustered distribution.
        #[arg(long, default_value = "1/3")]
        epsilon: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and write the report.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Also write the final restricted master LP in LP format.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Solve instances with the scheme and baselines; append one CSV row per algorithm.
    Compare {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        epsilon: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "ffd")]
        with: Vec<Baseline>,
        /// CSV file to append to; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a packing against its instance.
    Verify {
        #[arg(long)]
        packing: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("AFPTAS_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { problem, n, k, size_dist, penalty_dist, seed, epsilon, out } => {
            commands::generate(commands::GenerateArgs {
                problem,
                n: n as usize,
                k: k as usize,
                size_dist,
                penalty_dist,
                seed,
                epsilon: &epsilon,
                out: out.as_deref(),
            })
        }
        Command::Solve { input, epsilon, out, format, dump_lp } => {
            commands::solve(&input, &epsilon, out.as_deref(), format, dump_lp.as_deref())
        }
        Command::Compare { inputs, epsilon, with, out } => commands::compare(&inputs, &epsilon, &with, out.as_deref()),
        Command::Verify { packing, input } => commands::verify(&packing, &input),
    }
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
