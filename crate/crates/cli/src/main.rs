use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use satloc::bounds::{
    default_max_epsilon, lp_lower_bound, max_variant_gadget, sum_variant_gadget, BoundCertificate, SolveMode,
};
use satloc::harness::{adversarial_search, ratio_sweep, GeneratorConfig, SweepReport};
use satloc::mechanisms::{partition_stats, run_mechanism};
use satloc::tables::{paper_tables, LowerBoundStatus, TablesConfig};
use satloc::truthfulness::{check_gsp_with_budget, check_sp, SpReport, Verdict, DEFAULT_GSP_BUDGET};
use satloc::{evaluate, parse_instance, solve, Instance, MechanismId, Objective, Outcome, Rational, Variant};
use serde_json::json;

const LP_TOLERANCE: f64 = 0.98;

#[derive(Parser)]
#[command(name = "satloc", version, about = "Facility location for multi-location agents with satisfaction")]
struct Cli {
    /// Worker threads for parallel checks and sweeps.
    #[arg(long, global = true, env = "SATLOC_JOBS")]
    jobs: Option<usize>,
    /// Output format; defaults to csv for `ratio` and `search`, text otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
struct InstanceArg {
    /// Instance JSON file, or `-` for stdin.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    mechanism: MechanismId,
    /// Defaults to the objective the mechanism targets.
    #[arg(long)]
    objective: Option<Objective>,
    /// Defaults to the mechanism's first intended variant.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal facility location.
    Solve {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value = "ss")]
        objective: Objective,
    },
    /// Run a mechanism and report its outcome and satisfactions.
    Run {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Search for a profitable single-agent misreport.
    CheckSp {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        instance: InstanceArg,
        /// Misreport values include `k/grid`.
        #[arg(long, default_value_t = 12)]
        grid: u32,
    },
    /// Search for a coalition misreport that helps every member.
    CheckGsp {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long, default_value_t = 3)]
        coalition_size: usize,
        #[arg(long, default_value_t = 4)]
        grid: u32,
        /// Joint deviations to try before giving up as inconclusive.
        #[arg(long, default_value_t = DEFAULT_GSP_BUDGET)]
        budget: usize,
    },
    /// Random sweep of approximation ratios; fails if a proven bound is exceeded.
    Ratio {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Hill-climbing search for bad instances.
    Search {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Number of random restarts.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
    },
    /// Certify a randomized lower bound with the gadget LP.
    Bounds {
        /// 7: sum-variant gadget, 10: max-variant gadget.
        #[arg(long, value_parser = ["7", "10"])]
        theorem: String,
        /// Lottery support `k/grid`; defaults to 120 (sum) or 256 (max).
        #[arg(long)]
        grid: Option<u32>,
        /// Max-variant gadget parameter; defaults to the grid point nearest the optimum.
        #[arg(long)]
        epsilon: Option<Rational>,
        /// Pivot in exact rationals instead of floating point.
        #[arg(long)]
        exact: bool,
    },
    /// Recompute the summary tables of upper and lower bounds.
    PaperTables {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

enum Failure {
    /// Checks ran and something did not hold.
    Assertion(String),
    /// Bad input.
    Usage(String),
}

type CmdResult = Result<bool, Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn q_text(r: &Rational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("{r} ({})", r.to_decimal_string(6))
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(usage)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    parse_instance(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn outcome_csv(outcome: &Outcome) -> String {
    outcome.support().iter().map(|(y, p)| format!("{y}:{p}")).collect::<Vec<_>>().join(" ")
}

fn cmd_solve(instance: &Instance, objective: Objective, format: Format) -> CmdResult {
    let r = solve(instance, objective);
    match format {
        Format::Text => {
            println!("objective: {objective}");
            println!("location: {}", q_text(&r.location));
            println!("value: {}", q_text(&r.value));
        }
        Format::Csv => {
            println!("objective,location,value");
            println!("{objective},{},{}", r.location, r.value);
        }
        Format::Json => print_json(&r),
    }
    Ok(true)
}

fn cmd_run(id: MechanismId, instance: &Instance, format: Format) -> CmdResult {
    let run = run_mechanism(id, instance);
    let sat = evaluate(&run.outcome, instance);
    match format {
        Format::Text => {
            println!("mechanism: {id}{}", if run.off_label { " (off-label instance)" } else { "" });
            match &run.outcome {
                Outcome::Point(y) => println!("outcome: point {}", q_text(y)),
                Outcome::Lottery(entries) => {
                    println!("outcome: lottery");
                    for (y, p) in entries {
                        println!("  {} with probability {}", q_text(y), q_text(p));
                    }
                }
            }
            for (i, s) in sat.per_agent.iter().enumerate() {
                println!("agent {i}: {}", q_text(s));
            }
            println!("expected SS: {}", q_text(&sat.ss));
            println!("expected MS: {}", q_text(&sat.ms));
            let stats = partition_stats(instance);
            println!("partition: n1={} n2={} s1={} s2={}", stats.n1, stats.n2, stats.s1, stats.s2);
        }
        Format::Csv => {
            println!("mechanism,outcome,ss,ms");
            println!("{id},{},{},{}", outcome_csv(&run.outcome), sat.ss, sat.ms);
        }
        Format::Json => print_json(&json!({
            "mechanism": id,
            "off_label": run.off_label,
            "outcome": run.outcome,
            "satisfaction": sat,
        })),
    }
    Ok(true)
}

fn print_sp(id: MechanismId, instance: &Instance, report: &SpReport, format: Format) -> CmdResult {
    let verdict = match report.verdict {
        Verdict::SpHolds => "sp_holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    };
    match format {
        Format::Text => {
            println!("mechanism: {id}");
            println!("verdict: {verdict}");
            println!("candidates tried: {}", report.candidates_tried);
            if let Some(w) = &report.witness {
                for (k, (i, r)) in w.deviators.iter().zip(&w.reports).enumerate() {
                    println!(
                        "agent {i} reports {r:?}: satisfaction {} -> {}",
                        q_text(&w.before[k]),
                        q_text(&w.after[k])
                    );
                }
                println!("outcome under misreport: {}", w.outcome);
            }
        }
        Format::Csv => {
            println!("mechanism,instance,verdict,candidates_tried,deviators,outcome");
            let deviators = report
                .witness
                .as_ref()
                .map(|w| w.deviators.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                .unwrap_or_default();
            let outcome = report.witness.as_ref().map(|w| outcome_csv(&w.outcome)).unwrap_or_default();
            println!("{id},{instance},{verdict},{},{deviators},{outcome}", report.candidates_tried);
        }
        Format::Json => print_json(report),
    }
    Ok(report.verdict == Verdict::SpHolds)
}

fn sweep_config(args: &SweepArgs) -> Result<(Objective, GeneratorConfig), Failure> {
    let d = args.mechanism.descriptor();
    let variant = args.variant.unwrap_or(d.variants[0]);
    Ok((args.objective.unwrap_or(d.objective), GeneratorConfig::new(d.setting, variant, args.seed)))
}

fn print_sweep(report: &SweepReport, format: Format) {
    match format {
        Format::Csv => {
            println!("{}", SweepReport::CSV_HEADER);
            println!("{}", report.to_csv_row());
        }
        Format::Json => print_json(report),
        Format::Text => {
            println!("mechanism: {} objective: {}", report.mechanism, report.objective);
            println!("samples: {} seed: {}", report.samples, report.seed);
            let worst = match report.worst.finite() {
                Some(r) => q_text(r),
                None => "unbounded".to_string(),
            };
            println!("worst ratio: {worst}");
            println!("worst instance: {}", report.worst_instance);
        }
    }
}

fn cmd_ratio(args: &SweepArgs, samples: usize, format: Format) -> CmdResult {
    let (objective, config) = sweep_config(args)?;
    match ratio_sweep(args.mechanism, objective, &config, samples) {
        Ok(report) => {
            print_sweep(&report, format);
            Ok(true)
        }
        Err(exceeded) => Err(Failure::Assertion(exceeded.to_string())),
    }
}

fn cmd_search(args: &SweepArgs, restarts: usize, iterations: usize, format: Format) -> CmdResult {
    let (objective, config) = sweep_config(args)?;
    print_sweep(&adversarial_search(args.mechanism, objective, &config, restarts, iterations), format);
    Ok(true)
}

fn cmd_bounds(theorem: &str, grid: Option<u32>, epsilon: Option<Rational>, exact: bool, format: Format) -> CmdResult {
    let (gadget, grid) = if theorem == "7" {
        if epsilon.is_some() {
            return Err(usage("--epsilon only applies to --theorem 10"));
        }
        (sum_variant_gadget(), grid.unwrap_or(120))
    } else {
        let grid = grid.unwrap_or(256);
        let eps = epsilon.unwrap_or_else(|| default_max_epsilon(grid));
        (max_variant_gadget(&eps).map_err(usage)?, grid)
    };
    let mode = if exact { SolveMode::Exact } else { SolveMode::Floating };
    let cert: BoundCertificate = lp_lower_bound(&gadget, grid, mode).map_err(usage)?;
    match format {
        Format::Text => print!("{}", cert.report()),
        Format::Csv => {
            println!("gadget,grid,mode,t_star,bound,paper_bound,iterations");
            println!(
                "{},{},{},{},{},{},{}",
                cert.gadget,
                cert.grid,
                if exact { "exact" } else { "floating" },
                cert.exact_t_star.as_ref().map_or(cert.t_star.to_string(), ToString::to_string),
                cert.exact_bound().map_or(cert.bound.to_string(), |b| b.to_string()),
                cert.reference_bound.map_or(String::new(), |r| r.to_string()),
                cert.iterations
            );
        }
        Format::Json => print_json(&cert),
    }
    Ok(cert.reference_bound.is_none_or(|r| cert.bound >= LP_TOLERANCE * r))
}

fn cmd_tables(samples: usize, seed: u64, format: Format) -> CmdResult {
    let config = TablesConfig { samples, seed, ..TablesConfig::default() };
    let report = paper_tables(&config);
    match format {
        Format::Json => print_json(&report),
        Format::Csv => {
            println!("table,setting,variant,objective,mechanism,upper_bound,tight_ratio,sweep_max,lower_bound,lower_bound_source");
            for r in &report.rows {
                let source = match r.lower_bound_status {
                    LowerBoundStatus::Cited => "cited",
                    LowerBoundStatus::Reproduced(_) => "reproduced",
                    LowerBoundStatus::NotReproduced(_) => "not_reproduced",
                };
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.table,
                    r.setting,
                    r.variant,
                    r.objective,
                    r.mechanism,
                    r.upper_bound,
                    r.tight_ratio.as_ref().map_or(String::new(), ToString::to_string),
                    r.sweep_max,
                    r.lower_bound,
                    source
                );
            }
        }
        Format::Text => print!("{}", report.render()),
    }
    let lower_ok = report.rows.iter().all(|r| !matches!(r.lower_bound_status, LowerBoundStatus::NotReproduced(_)));
    Ok(report.all_upper_bounds_match() && lower_ok)
}

fn dispatch(cli: Cli) -> CmdResult {
    let text_default = cli.format.unwrap_or(Format::Text);
    let table_default = cli.format.unwrap_or(Format::Csv);
    match cli.command {
        Command::Solve { instance, objective } => cmd_solve(&load_instance(&instance.instance)?, objective, text_default),
        Command::Run { mechanism, instance } => cmd_run(mechanism, &load_instance(&instance.instance)?, text_default),
        Command::CheckSp { mechanism, instance, grid } => {
            let inst = load_instance(&instance.instance)?;
            print_sp(mechanism, &inst, &check_sp(&mechanism, &inst, grid.max(1)), text_default)
        }
        Command::CheckGsp { mechanism, instance, coalition_size, grid, budget } => {
            let inst = load_instance(&instance.instance)?;
            let report = check_gsp_with_budget(&mechanism, &inst, coalition_size, grid.max(1), budget);
            print_sp(mechanism, &inst, &report, text_default)
        }
        Command::Ratio { sweep, samples } => cmd_ratio(&sweep, samples, table_default),
        Command::Search { sweep, samples, iterations } => cmd_search(&sweep, samples, iterations, table_default),
        Command::Bounds { theorem, grid, epsilon, exact } => cmd_bounds(&theorem, grid, epsilon, exact, text_default),
        Command::PaperTables { samples, seed } => cmd_tables(samples, seed, text_default),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Assertion(message)) => {
            eprintln!("assertion failed: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
