//! `osclab`: ordinal calculator, walk and oscillation inspection, circle
//! point export, Kronecker searches, Δ-system extraction and the experiment
//! runner.
//!
//! Exit codes: 0 success or report-only, 1 failed verdict or undecided
//! result, 2 usage or parse error, 3 I/O error, 4 internal error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Overrides;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Internal(m) => m,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "osclab",
    version,
    about = "Walks, oscillations and circle-valued points on ordinals below epsilon_0"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat TOML file of `key = value` settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bits of fixed-point precision for circle arithmetic.
    #[arg(long, global = true)]
    precision: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit one JSON object on stdout instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Decimal places for rendered angles.
    #[arg(long, global = true)]
    digits: Option<usize>,
    /// Output directory for records and exports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    search_cap: Option<u64>,
    /// Staircase depth for generated windows and samples.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Staircase breadth for generated windows and samples.
    #[arg(long, global = true)]
    breadth: Option<usize>,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ordinal calculator.
    #[command(subcommand)]
    Ord(OrdCommand),
    /// The walk from beta down to alpha, its lower trace and osc.
    Walk { alpha: String, beta: String },
    /// osc(alpha, beta) and its oscillation points.
    Osc { alpha: String, beta: String },
    /// Export the points w_beta on a window as CSV plus a JSON sidecar.
    Points(commands::PointsArgs),
    /// Least m with u_i z_i^m within epsilon of v_i, or a uniform bound.
    Kronecker(commands::KroneckerArgs),
    /// Extract a Δ-system from a family of finite sets.
    Delta(commands::DeltaArgs),
    /// Run a lab experiment and append its record.
    Experiment(commands::ExperimentArgs),
}

#[derive(Subcommand, Debug)]
enum OrdCommand {
    /// Compare two ordinals.
    Cmp { a: String, b: String },
    /// Ordinal sum a + b.
    Add { a: String, b: String },
    /// Successor a + 1.
    Succ { a: String },
    /// The first ladder points beta[0], beta[1], ... of a limit.
    Ladder {
        beta: String,
        #[arg(long, default_value_t = 8)]
        count: u64,
    },
}

/// What a command prints, and the exit code it settles on.
pub struct Output {
    pub text: String,
    pub json: serde_json::Value,
    pub code: u8,
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    let flags = Overrides {
        precision: g.precision,
        search_cap: g.search_cap,
        depth: g.depth,
        breadth: g.breadth,
        seed: g.seed,
        out: g.out.clone(),
        digits: g.digits,
    };
    let file = match &g.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let (cfg, explicit) = config::resolve(flags.over(file))?;
    let exec = if g.sequential {
        osclab::Exec::Sequential
    } else {
        osclab::Exec::default()
    };
    match cli.command {
        Command::Ord(c) => match c {
            OrdCommand::Cmp { a, b } => commands::ord_cmp(&a, &b),
            OrdCommand::Add { a, b } => commands::ord_add(&a, &b),
            OrdCommand::Succ { a } => commands::ord_succ(&a),
            OrdCommand::Ladder { beta, count } => commands::ord_ladder(&beta, count),
        },
        Command::Walk { alpha, beta } => commands::walk(&alpha, &beta),
        Command::Osc { alpha, beta } => commands::osc(&alpha, &beta),
        Command::Points(args) => commands::points(&args, &cfg),
        Command::Kronecker(args) => commands::kronecker(&args, &cfg, exec),
        Command::Delta(args) => commands::delta(&args),
        Command::Experiment(args) => commands::experiment(&args, &cfg, &explicit, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.global.json;
    match run(cli) {
        Ok(out) => {
            if json {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if json {
                println!("{}", serde_json::json!({"error": e.message(), "exit_code": e.code()}));
            }
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
