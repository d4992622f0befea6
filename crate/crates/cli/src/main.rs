use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lefschetz_cli::run::{self, budget_from_exponent, Command, Options, Outcome};
use lefschetz_cli::scenario_file::parse_m_range;
use lefschetz_core::trace_formula::VerifyBudget;

#[derive(Parser)]
#[command(name = "lefschetz", version, about = "Check both sides of the mod p^n trace formula on scenario files")]
struct Cli {
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest field enumerated or used for stabilization is 2^BUDGET.
    #[arg(long, global = true, default_value_t = 24, value_parser = clap::value_parser!(u32).range(1..=24))]
    budget: u32,
    /// Twist range `a..b` or `a,b,c`, replacing the files' m_range.
    #[arg(long, global = true, value_parser = parse_twists)]
    m: Option<Twists>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone)]
struct Twists(Vec<usize>);

fn parse_twists(s: &str) -> Result<Twists, String> {
    parse_m_range(s).map(Twists)
}

#[derive(Subcommand)]
enum Cmd {
    /// Cohomological trace against the fixed-point sum.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Coherent trace on a proper elliptic curve against the fixed-point count mod p.
    WoodsHole {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Degree formula against exhaustive enumeration.
    FixCount {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Hasse invariant against the point count.
    HasseWitt {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Randomized semilinear-module suite.
    Lemma5 {
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5])]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
        degree: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        modules: usize,
    },
    /// Table of q^m against the vanishing p-adic cohomology of the affine line.
    ZpDemo {
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 9])]
        q: Vec<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = budget_from_exponent(cli.budget);
    let opts = Options {
        budget: VerifyBudget {
            field: budget,
            oracle: budget,
        },
        m_override: cli.m.clone().map(|t| t.0),
    };
    let files_command = |c: Command, files: &[PathBuf]| {
        let (out, diagnostics) = run::run_files(c, files, &opts);
        for d in diagnostics {
            eprintln!("{d}");
        }
        Ok(out)
    };
    let result: Result<Outcome, run::RunError> = match &cli.command {
        Cmd::Verify { files } => files_command(Command::Verify, files),
        Cmd::WoodsHole { files } => files_command(Command::WoodsHole, files),
        Cmd::FixCount { files } => files_command(Command::FixCount, files),
        Cmd::HasseWitt { files } => files_command(Command::HasseWitt, files),
        Cmd::Lemma5 { p, n, degree, modules } => {
            run::lemma5(&run::suite_grid(p, n, degree, *modules), cli.seed, budget)
        }
        Cmd::ZpDemo { q } => run::zp_demo(q, cli.m.as_ref().map_or(&[1, 2, 3][..], |t| &t.0)),
    };
    match result {
        Ok(out) => {
            print!("{}", out.report());
            if out.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
