//! `diampreserve` — decide, decompose, refute and replay diameter
//! preservation for linear maps on `K^n`.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diampreserve_cli::commands::{self, Outcome, RunOptions, EXIT_ERROR};
use diampreserve_cli::formats::{self, MatrixInput};
use diampreserve_core::FieldTag;

#[derive(Parser)]
#[command(
    name = "diampreserve",
    version,
    about = "Verdicts, canonical triples, refutation witnesses and structural replays \
             for diameter-preserving linear maps on K^n",
    after_help = "Exit codes: 0 preserving, 1 not preserving, 2 singular or degenerate \
                  dimension, 3 input or usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide diameter preservation and emit a diagnostic report
    Check(InputArgs),
    /// Recover the canonical triple (tau, sigma, t) or report the failure
    Decompose(InputArgs),
    /// Emit a seeded random canonical map with its triple
    Generate(GenerateArgs),
    /// Re-run the finite pair/triple constructions step by step
    Replay(ReplayArgs),
    /// Search for a vector whose diameter changes under the map
    Witness(InputArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file path, or "-" for standard input
    path: String,
    /// Parse the input as CSV (plain real matrix, one row per line)
    #[arg(long)]
    csv: bool,
    /// Require exact arithmetic (the default); rejects float-mode input
    #[arg(long, conflicts_with = "tol")]
    exact: bool,
    /// Run the numerical pipeline at this relative tolerance instead of
    /// exact arithmetic (float-mode files use 1e-9 by default)
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for witness search and stabilized intersections
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on random refutation probes
    #[arg(long, default_value_t = 10_000)]
    max_probes: usize,
    /// Emit machine-readable JSON (the default)
    #[arg(long)]
    json: bool,
    /// Pretty-print the JSON and append a human-readable summary line
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for FieldTag {
    fn from(value: FieldArg) -> FieldTag {
        match value {
            FieldArg::Real => FieldTag::Real,
            FieldArg::Complex => FieldTag::Complex,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Dimension of the generated map
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    field: FieldArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Force t(1) = -tau, producing a singular map
    #[arg(long)]
    singular: bool,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Probe count for the constancy step
    #[arg(long, default_value_t = 20)]
    probes: usize,
}

fn read_input(args: &InputArgs) -> Result<MatrixInput, String> {
    let text = if args.path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        buf
    } else {
        std::fs::read_to_string(&args.path).map_err(|e| format!("reading {}: {e}", args.path))?
    };
    let input = if args.csv {
        formats::parse_csv(&text).map_err(|e| e.to_string())?
    } else {
        formats::parse_matrix_document(&text).map_err(|e| e.to_string())?
    };
    if args.exact {
        if let MatrixInput::Float(_) = input {
            return Err(
                "--exact requires exact-mode input, but the file carries float entries".into(),
            );
        }
    }
    Ok(input)
}

fn run_options(args: &InputArgs) -> RunOptions {
    RunOptions {
        seed: args.seed,
        max_probes: args.max_probes,
        tolerance: args.tol,
    }
}

fn emit(outcome: &Outcome, pretty: bool) -> i32 {
    let body = if pretty {
        let mut s = serde_json::to_string_pretty(&outcome.json).expect("serializable");
        s.push_str("\n# ");
        s.push_str(&outcome.summary);
        s
    } else {
        serde_json::to_string(&outcome.json).expect("serializable")
    };
    println!("{body}");
    outcome.code
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check(args) => {
            let input = read_input(&args)?;
            let outcome = commands::cmd_check(input, &run_options(&args))?;
            Ok(emit(&outcome, args.pretty))
        }
        Command::Decompose(args) => {
            let input = read_input(&args)?;
            let outcome = commands::cmd_decompose(input, &run_options(&args))?;
            Ok(emit(&outcome, args.pretty))
        }
        Command::Witness(args) => {
            let input = read_input(&args)?;
            let outcome = commands::cmd_witness(input, &run_options(&args))?;
            Ok(emit(&outcome, args.pretty))
        }
        Command::Generate(args) => {
            let outcome =
                commands::cmd_generate(args.n, args.field.into(), args.seed, args.singular)?;
            Ok(emit(&outcome, args.pretty))
        }
        Command::Replay(args) => {
            let input = read_input(&args.input)?;
            let outcome = commands::cmd_replay(input, &run_options(&args.input), args.probes)?;
            Ok(emit(&outcome, args.input.pretty))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
