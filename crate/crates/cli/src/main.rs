//! `meanpay`: mean-payoff solver front end.
//!
//! Exit codes: 0 success, 1 unreadable or malformed model, 2 bad flags,
//! 3 solver guard (SC1 on a multichain model, oracle strategy limit).

mod bench;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use meanpay_core::report::SolveError;
use meanpay_core::text::parse_document;
use meanpay_core::{solve, Algorithm, GeneratorSpec, Heuristic, ModelSource, SolveOptions, StopRule};

const EXIT_INPUT: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(name = "meanpay", version, about = "Maximal mean payoff of finite MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model and print a report.
    Solve(SolveArgs),
    /// Run a matrix of algorithms x models.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Model file; use `--generate` instead for a built-in family.
    model: Option<PathBuf>,
    #[arg(long, default_value = "local-vi")]
    alg: Algorithm,
    /// Successor heuristic for `odv`.
    #[arg(long, default_value = "md")]
    heuristic: Heuristic,
    #[command(flatten)]
    tuning: Tuning,
    /// Built-in family, e.g. `rare-branch:1000,0.001`, `mec-chain:4,3`, `grid:5,5`, `three-mec`, `span-trap:1000`.
    #[arg(long, value_name = "FAMILY:PARAMS")]
    generate: Option<GeneratorSpec>,
    /// JSON report (default).
    #[arg(long, conflicts_with = "plain")]
    json: bool,
    /// `key: value` report.
    #[arg(long)]
    plain: bool,
}

/// Solver knobs shared by `solve` and `bench`.
#[derive(Args, Clone)]
struct Tuning {
    /// Stopping rule for `nvi`; sc2 and sc3 are unsound and flagged as such.
    #[arg(long, default_value = "sc1")]
    criterion: StopRule,
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    eps: f64,
    /// Visits of one node that end an `odv` episode.
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Aperiodicity parameter.
    #[arg(long, default_value_t = 0.95, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap (episodes for `odv`).
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long)]
    timeout_ms: Option<u64>,
}

impl Tuning {
    fn options(&self, algorithm: Algorithm, heuristic: Heuristic) -> Result<SolveOptions, String> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(format!("--eps must be positive, got {}", self.eps));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(format!("--tau must lie strictly between 0 and 1, got {}", self.tau));
        }
        if self.k < 2 {
            return Err(format!("--k must be at least 2, got {}", self.k));
        }
        Ok(SolveOptions {
            algorithm,
            criterion: self.criterion,
            epsilon: self.eps,
            heuristic,
            k: self.k,
            tau: self.tau,
            seed: self.seed,
            max_iters: self.max_iters,
            timeout: self.timeout_ms.map(Duration::from_millis),
            ..SolveOptions::default()
        })
    }
}

/// Error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Document(_) | SolveError::Exact(_) => EXIT_INPUT,
            _ => EXIT_GUARD,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn load_model(path: &PathBuf) -> Result<ModelSource, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let document = parse_document(&text).map_err(|errs| {
        let lines: Vec<String> = errs.iter().map(|e| format!("{}: {e}", path.display())).collect();
        Failure::input(lines.join("\n"))
    })?;
    Ok(ModelSource::Document {
        name: path.display().to_string(),
        document,
    })
}

fn run_solve(args: &SolveArgs) -> Result<(), Failure> {
    let options = args.tuning.options(args.alg, args.heuristic).map_err(Failure::usage)?;
    let source = match (&args.model, &args.generate) {
        (Some(path), None) => load_model(path)?,
        (None, Some(spec)) => ModelSource::Generated(*spec),
        (Some(_), Some(_)) => return Err(Failure::usage("give either a model file or --generate, not both")),
        (None, None) => return Err(Failure::usage("no model: give a file or --generate")),
    };
    let report = solve(&source, &options)?;
    if args.plain {
        print!("{}", report.to_plain());
    } else {
        println!("{}", report.to_json());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
