use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use robust_supplier::bench::{run_bench, BenchConfig};
use robust_supplier::generate::{generate, Family, GenerateConfig, MetricKind};
use robust_supplier::instance::{load_instance, RobustInstance};
use robust_supplier::pcm::doubles::{HalvingSolver, InflatedBudgetSolver};
use robust_supplier::pcm::{ExactSolver, PcmSolver};
use robust_supplier::solution_file::{verify_solution, SolutionFile, Verdict};
use robust_supplier::solve::{solve_with, SolveError, SolveOptions};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Robust supplier with down-closed facility constraints: generate instances,
/// solve them within three times the optimal radius, verify solutions and
/// benchmark against brute force.
#[derive(Parser)]
#[command(name = "robust-supplier", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Solve an instance and verify the result.
    Solve(SolveArgs),
    /// Check a solution file against an instance.
    Verify(VerifyArgs),
    /// Compare solver radii with brute-force optima on random instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// knapsack, multiknapsack, matroid or knapsack-matroid.
    #[arg(long)]
    family: Family,
    #[arg(long, default_value_t = 6)]
    facilities: usize,
    #[arg(long, default_value_t = 8)]
    customers: usize,
    /// Coverage demand; random in 1..=customers when omitted.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// euclidean or graph.
    #[arg(long, default_value = "euclidean")]
    metric: MetricKind,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Override the instance's coverage demand.
    #[arg(long)]
    m: Option<usize>,
    /// Ellipsoid iterations per radius guess.
    #[arg(long)]
    budget: Option<usize>,
    /// Reject instances violating the triangle inequality.
    #[arg(long)]
    strict_metric: bool,
    /// Radius guesses searched concurrently.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Use an approximate partition solver keeping this fraction of the optimum.
    #[arg(long, conflicts_with = "epsilon")]
    rho: Option<f64>,
    /// Use a partition solver allowed to exceed knapsack budgets by this fraction.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the solution file here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write every cut of the search here, one per line.
    #[arg(long)]
    cut_log: Option<PathBuf>,
    /// Print the solution as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long)]
    strict_metric: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Instances per family.
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Families to run, comma separated or repeated; none gives an empty report.
    #[arg(long, value_delimiter = ',')]
    family: Vec<Family>,
    #[arg(long, default_value_t = 8)]
    max_facilities: usize,
    #[arg(long, default_value_t = 12)]
    max_customers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "euclidean")]
    metric: MetricKind,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write one JSON row per instance here.
    #[arg(long)]
    rows: Option<PathBuf>,
}

/// A message for standard error and the process exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load(path: &Path, strict: bool) -> Result<RobustInstance, Failure> {
    let loaded = load_instance(&read(path)?, strict)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.instance)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let cfg = GenerateConfig {
        family: args.family,
        facilities: args.facilities,
        customers: args.customers,
        m: args.m,
        seed: args.seed,
        metric: args.metric,
    };
    let text = generate(&cfg).map_err(input)?.to_text();
    match args.output {
        Some(path) => write(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let mut inst = load(&args.instance, args.strict_metric)?;
    if let Some(m) = args.m {
        inst = inst.with_demand(m).map_err(input)?;
    }
    let spec = inst.constraint.clone();
    let (solver, budget_factor): (Box<dyn PcmSolver>, Option<f64>) = match (args.rho, args.epsilon)
    {
        (Some(rho), _) if !(rho > 0.0 && rho <= 1.0) => {
            return Err(input(format!("--rho must lie in (0, 1], got {rho}")))
        }
        (_, Some(eps)) if !(eps >= 0.0) => {
            return Err(input(format!("--epsilon must be nonnegative, got {eps}")))
        }
        (Some(rho), _) => (Box::new(HalvingSolver::new(spec, rho)), None),
        (None, Some(eps)) => (
            Box::new(InflatedBudgetSolver::new(spec, eps)),
            Some(1.0 + eps),
        ),
        (None, None) => (Box::new(ExactSolver::new(spec)), None),
    };
    let options = SolveOptions {
        budget: args.budget,
        record: args.cut_log.is_some(),
        threads: args.threads,
    };
    let run = match solve_with(&inst, solver.as_ref(), &options) {
        Ok(run) => run,
        Err(SolveError::Infeasible) => {
            return Err(Failure {
                code: EXIT_INFEASIBLE,
                message: "no radius guess admits a solution".into(),
            })
        }
        Err(e @ SolveError::Certification(_)) => {
            return Err(Failure {
                code: EXIT_VERIFY,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(input(e)),
    };
    let sol = &run.solution;

    if let Some(path) = &args.cut_log {
        let mut log = String::new();
        for step in &run.trace {
            for cut in step.outcome.cuts() {
                log.push_str(&format!(
                    "guess {} {}\n",
                    step.guess,
                    cut.cut.log_line(&cut.point)
                ));
            }
        }
        write(path, &log)?;
    }
    let file = SolutionFile::from_solution(&inst, sol, budget_factor);
    if let Some(path) = &args.output {
        write(path, &file.to_text())?;
    }
    let verdict = verify_solution(&inst, &file).map_err(input)?;

    if args.json {
        let json = serde_json::json!({ "solution": sol, "verification": verdict.to_string() });
        println!("{json}");
    } else {
        let ids = |idx: &[usize], names: &[String]| {
            idx.iter()
                .map(|&i| names[i].as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("radius {}", sol.radius);
        println!("guess {}", sol.guess);
        println!("max-distance {}", sol.max_distance);
        println!(
            "open {}",
            ids(&sol.open_facilities, inst.space.facility_ids())
        );
        println!(
            "covered {} of {} required: {}",
            sol.covered.len(),
            sol.required,
            ids(&sol.covered, inst.space.customer_ids())
        );
        println!("iterations {}", sol.iterations);
        println!("verification {verdict}");
    }
    match verdict {
        Verdict::Pass => Ok(()),
        Verdict::Fail { .. } => Err(Failure {
            code: EXIT_VERIFY,
            message: verdict.to_string(),
        }),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let inst = load(&args.instance, args.strict_metric)?;
    let text = read(&args.solution)?;
    let file = SolutionFile::parse(&text)
        .map_err(|e| input(format!("{}: {e}", args.solution.display())))?;
    let verdict = verify_solution(&inst, &file).map_err(input)?;
    println!("{verdict}");
    match verdict {
        Verdict::Pass => Ok(()),
        Verdict::Fail { .. } => Err(Failure {
            code: EXIT_VERIFY,
            message: "verification failed".into(),
        }),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let cfg = BenchConfig {
        count: args.count,
        families: args.family,
        max_facilities: args.max_facilities,
        max_customers: args.max_customers,
        seed: args.seed,
        metric: args.metric,
        budget: args.budget,
        threads: args.threads,
    };
    let report = match run_bench(&cfg) {
        Ok(r) => r,
        Err(
            e @ robust_supplier::bench::BenchError::Solve {
                source: SolveError::Infeasible,
                ..
            },
        ) => {
            return Err(Failure {
                code: EXIT_INFEASIBLE,
                message: e.to_string(),
            })
        }
        Err(e) => return Err(input(e)),
    };
    if let Some(path) = &args.rows {
        write(path, &report.json_lines())?;
    }
    print!("{}", report.table());
    if report.within_limit() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "a ratio exceeds 3".into(),
        })
    }
}
