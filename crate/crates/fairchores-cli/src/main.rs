//! Command-line front end: solve instances, verify the solver against the
//! brute-force oracle, and generate random instances.
//!
//! Exit codes: 0 success (or verify PASS), 1 verify FAIL, 2 input or
//! validation error, 3 internal invariant failure.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use fairchores::io::{
    generate_instance, parse_instance, result_document, FamilyKind, GenConfig,
};
use fairchores::solver::{Criterion, PExponent};
use fairchores::verify::{brute_force_optimal, EnumerationBudget, VerifyError};

/// Tolerance when comparing floating malfare values (non-integer p);
/// rational-valued criteria compare exactly.
const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "fairchores", version, about = "Fair chore allocation for weighted agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    /// Lexicographically best ascending weighted-utility profile.
    Leximin,
    /// Lowest sum of weighted p-th-power costs (needs --p).
    Malfare,
    /// Lowest total cost.
    Usw,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and print the allocation as JSON.
    Solve {
        /// Instance document path.
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        /// Malfare exponent, a real >= 1; required iff the criterion is malfare.
        #[arg(long)]
        p: Option<String>,
        /// Output path; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Include the greedy hand-out trace in the result.
        #[arg(long)]
        trace: bool,
    },
    /// Solve and cross-check the criterion value against exhaustive enumeration.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long)]
        p: Option<String>,
        /// Cap on enumerated allocations (default 2000000).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Generate a pseudo-random instance document on standard output.
    Gen {
        /// Number of agents.
        #[arg(long)]
        n: usize,
        /// Number of chores.
        #[arg(long)]
        m: usize,
        /// Comma-separated cost families to draw from
        /// (approval_cap, partition_cap, explicit).
        #[arg(long, value_delimiter = ',')]
        families: Option<Vec<String>>,
        /// Probability of a non-unit weight, drawn from {1/2, 2, 3}.
        #[arg(long, default_value_t = 0.0)]
        weight_skew: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    /// Bad input: exit 2.
    Input(String),
    /// Solver invariant violation: exit 3.
    Internal(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        match self {
            Failure::Input(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
            Failure::Internal(message) => {
                eprintln!("internal error: {message}");
                ExitCode::from(3)
            }
        }
    }
}

fn build_criterion(arg: CriterionArg, p: Option<&str>) -> Result<Criterion, Failure> {
    match arg {
        CriterionArg::Malfare => {
            let raw = p.ok_or_else(|| {
                Failure::Input("--p is required with --criterion malfare".into())
            })?;
            let exponent = if let Ok(int) = raw.parse::<u32>() {
                PExponent::from_int(int)
            } else {
                let real = raw
                    .parse::<f64>()
                    .map_err(|_| Failure::Input(format!("--p: not a number: {raw:?}")))?;
                PExponent::new(real)
            }
            .map_err(|e| Failure::Input(format!("--p: {e}")))?;
            Ok(Criterion::Malfare(exponent))
        }
        CriterionArg::Leximin | CriterionArg::Usw if p.is_some() => Err(Failure::Input(
            "--p is only valid with --criterion malfare".into(),
        )),
        CriterionArg::Leximin => Ok(Criterion::WeightedLeximin),
        CriterionArg::Usw => Ok(Criterion::Usw),
    }
}

fn load_instance(
    path: &PathBuf,
) -> Result<(fairchores::io::InstanceDocument, fairchores::Instance), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run_solve(
    instance_path: PathBuf,
    criterion_arg: CriterionArg,
    p: Option<String>,
    output: Option<PathBuf>,
    trace: bool,
) -> Result<ExitCode, Failure> {
    let criterion = build_criterion(criterion_arg, p.as_deref())?;
    let (document, instance) = load_instance(&instance_path)?;
    let solution = criterion
        .solve(&instance)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let result = result_document(&instance, &document, &solution, &criterion, trace)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let text = result.to_json_string();
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_verify(
    instance_path: PathBuf,
    criterion_arg: CriterionArg,
    p: Option<String>,
    budget: Option<u64>,
) -> Result<ExitCode, Failure> {
    let criterion = build_criterion(criterion_arg, p.as_deref())?;
    let (_, instance) = load_instance(&instance_path)?;
    let budget = match budget {
        Some(max) => EnumerationBudget::with_max_allocations(max),
        None => EnumerationBudget::default(),
    };
    let oracle = brute_force_optimal(&instance, &criterion, &budget).map_err(|e| match e {
        VerifyError::BudgetExceeded { .. } => Failure::Input(e.to_string()),
    })?;
    let solution = criterion
        .solve(&instance)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    let solved = criterion
        .evaluate(&instance, &solution.allocation)
        .map_err(|e| Failure::Internal(e.to_string()))?;
    println!("solver:      {solved}");
    println!("brute-force: {}", oracle.value);
    if solved.approx_eq(&oracle.value, VERIFY_TOLERANCE) {
        println!("PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL");
        Ok(ExitCode::from(1))
    }
}

fn run_gen(
    agents: usize,
    chores: usize,
    families: Option<Vec<String>>,
    weight_skew: f64,
    seed: u64,
) -> Result<ExitCode, Failure> {
    let families = match families {
        Some(names) => names
            .iter()
            .map(|name| name.parse::<FamilyKind>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(Failure::Input)?,
        None => FamilyKind::ALL.to_vec(),
    };
    let config = GenConfig {
        agents,
        chores,
        families,
        weight_skew,
        seed,
    };
    let document = generate_instance(&config).map_err(|e| Failure::Input(e.to_string()))?;
    print!("{}", document.to_json_string());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            instance,
            criterion,
            p,
            output,
            trace,
        } => run_solve(instance, criterion, p, output, trace),
        Command::Verify {
            instance,
            criterion,
            p,
            budget,
        } => run_verify(instance, criterion, p, budget),
        Command::Gen {
            n,
            m,
            families,
            weight_skew,
            seed,
        } => run_gen(n, m, families, weight_skew, seed),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => failure.report(),
    }
}
