use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod format;
mod grid;

use commands::{CliError, Outcome, Table2Args, Table2Mode, TransformArgs, VerifyArgs, TABLE2_CELLS};

#[derive(Parser)]
#[command(name = "oddqft", version, about = "Simulate and check the odd cyclic group QFT")]
struct Cli {
    /// Worker threads for trials and sweeps (default: all cores).
    #[arg(long, global = true, env = "ODDQFT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose register sizes for a target error.
    Params {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Run seeded random states through the pipeline.
    Simulate {
        #[arg(long)]
        n: u64,
        /// log2 M.
        #[arg(long)]
        m: u32,
        /// log2 L.
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-trial CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Allow M above 2^24.
        #[arg(long)]
        force_large: bool,
    },
    /// Parameter table for the standard (N, epsilon) grid, as CSV.
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulation table: theorem parameters and/or the empirical minimum.
    Table2 {
        #[arg(long, value_enum, default_value_t = Table2Mode::Both)]
        mode: Table2Mode,
        /// Restrict to one N (requires --epsilon).
        #[arg(long, requires = "epsilon")]
        n: Option<u64>,
        #[arg(long, requires = "n")]
        epsilon: Option<f64>,
        /// Trials per theorem-parameter row.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Trials per candidate in the empirical search.
        #[arg(long, default_value_t = 1000)]
        best_trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check lemma inequalities over a parameter grid.
    Verify {
        /// Lemma ids, comma separated or repeated; default all.
        #[arg(long)]
        lemma: Vec<String>,
        /// Grid such as "n=13..51:2;m=auto..16;l=4,5" (m, l are exponents).
        #[arg(long, conflicts_with = "n")]
        grid: Option<String>,
        /// Single point: N.
        #[arg(long = "N", alias = "n")]
        n: Option<u64>,
        /// Single point: M as a size.
        #[arg(long = "M")]
        m_size: Option<u64>,
        /// Single point: log2 M.
        #[arg(long = "m")]
        m_exp: Option<u32>,
        /// Single point: L as a size.
        #[arg(long = "L")]
        l_size: Option<u64>,
        /// Single point: log2 L.
        #[arg(long = "l")]
        l_exp: Option<u32>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print every report line, not only failures.
        #[arg(long)]
        verbose: bool,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform one state file and report its error.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        out: PathBuf,
        /// JSON report path (default: <out>.report.json).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        force_large: bool,
    },
}

fn run(cli: Cli) -> commands::CmdResult {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Params { n, epsilon } => commands::params(n, epsilon),
        Command::Simulate {
            n,
            m,
            l,
            trials,
            seed,
            out,
            force_large,
        } => commands::simulate(n, m, l, trials, seed, out.as_deref(), force_large),
        Command::Table1 { out } => commands::table1(out.as_deref()),
        Command::Table2 {
            mode,
            n,
            epsilon,
            trials,
            best_trials,
            seed,
            out,
        } => {
            let cells = match (n, epsilon) {
                (Some(n), Some(e)) => vec![(n, e)],
                _ => TABLE2_CELLS.to_vec(),
            };
            let args = Table2Args {
                mode,
                cells,
                trials,
                best_trials,
                seed,
            };
            commands::table2(&args, out.as_deref())
        }
        Command::Verify {
            lemma,
            grid,
            n,
            m_size,
            m_exp,
            l_size,
            l_exp,
            trials,
            seed,
            verbose,
            out,
        } => {
            let args = VerifyArgs {
                lemmas: lemma,
                grid,
                n,
                m_size,
                m_exp,
                l_size,
                l_exp,
                trials,
                seed,
                verbose,
            };
            commands::verify(&args, out.as_deref())
        }
        Command::Transform {
            input,
            m,
            l,
            out,
            report,
            force_large,
        } => commands::transform(&TransformArgs {
            input,
            m,
            l,
            out,
            report,
            force_large,
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
