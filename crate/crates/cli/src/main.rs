use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use firebreak_cli::*;
use firebreak_core::casestudy::black_saturday;
use firebreak_core::generator::{generate, parse_fleet, GeneratorParams};
use firebreak_core::io::{instance_to_string, load_instance, load_plan, plan_to_string};
use firebreak_core::report::{comparison_csv, report_percentages};
use firebreak_core::solve::{build_model, Formulation};
use firebreak_core::validator::check;
use firebreak_core::{evaluate, Error, Instance};
use firebreak_milp::{export_lp, BranchRule, Engine, ExternalSolver, SolveLimits};

#[derive(Parser)]
#[command(name = "firebreak", version, about = "Asset protection routing under wind-change uncertainty")]
struct Cli {
    /// Random seed for generated instances.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Solver budget per solve, in seconds.
    #[arg(long, global = true, default_value_t = 300.0)]
    time_limit: f64,
    /// Parallel instances in `compare`.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SolverArgs {
    /// builtin or external.
    #[arg(long, default_value = "builtin")]
    solver: String,
    /// External solver command with {lp}, {sol} and optional {time}; defaults to $FIREBREAK_SOLVER_CMD.
    #[arg(long)]
    solver_cmd: Option<String>,
    /// Builtin engine: bnb (own branch and bound) or highs.
    #[arg(long, default_value = "bnb")]
    engine: String,
    /// Branching rule of bnb: objective-first or most-fractional.
    #[arg(long, default_value = "objective-first")]
    branching: String,
    /// two-stage or multi.
    #[arg(long, default_value = "two-stage")]
    model: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate {
        #[arg(long, default_value_t = 50)]
        assets: usize,
        /// set1, set2, set2-caption or counts such as 5,3,2.
        #[arg(long, default_value = "set1")]
        fleet: String,
        /// Generator parameter override, e.g. --param st=4.5.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Write the bundled case-study instance.
    Casestudy,
    /// Solve the two-stage (or multi-scenario) model.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Also write the model in LP format.
        #[arg(long)]
        lp_out: Option<PathBuf>,
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// Plan file used as the first incumbent.
        #[arg(long)]
        warm_start: Option<PathBuf>,
    },
    /// Run the dynamic rerouting baseline.
    Reroute {
        instance: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        plan_out: Option<PathBuf>,
        /// JSON with both solves, staging positions and both value accountings.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Check a plan against an instance.
    Validate { instance: PathBuf, plan: PathBuf },
    /// Compare two-stage and rerouting, one CSV row per instance.
    Compare {
        /// Fleets to generate instances for.
        #[arg(long, value_delimiter = ',', default_value = "set1")]
        fleets: Vec<String>,
        /// Instance sizes.
        #[arg(long, value_delimiter = ',', default_value = "15,20,25")]
        sizes: Vec<usize>,
        /// Seeds per (fleet, size), counting up from --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Instance files to compare instead of generated ones.
        #[arg(long, num_args = 1..)]
        instances: Vec<PathBuf>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fire impact times and risk categories as CSV.
    Firemap {
        /// Grid spacing in km.
        #[arg(long, default_value_t = 2.0)]
        step: f64,
        /// Map the assets of a generated instance of this size instead of a grid.
        #[arg(long)]
        assets: Option<usize>,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
}

enum Failure {
    Error(Error),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<firebreak_milp::MilpError> for Failure {
    fn from(e: firebreak_milp::MilpError) -> Self {
        Failure::Error(Error::from(e))
    }
}

type Outcome = Result<(), Failure>;

fn param(msg: impl Into<String>) -> Failure {
    Failure::Error(Error::Param(msg.into()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generator_params(cli: &Cli, overrides: &[String]) -> Result<GeneratorParams, Failure> {
    let mut params = GeneratorParams {
        seed: cli.seed,
        ..GeneratorParams::default()
    };
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| param(format!("expected KEY=VALUE, got `{kv}`")))?;
        params.set(k.trim(), v)?;
    }
    Ok(params)
}

fn run_config(cli: &Cli, args: &SolverArgs) -> Result<RunConfig, Failure> {
    let formulation: Formulation = args.model.parse().map_err(param)?;
    let engine: Engine = args.engine.parse().map_err(param)?;
    let branching: BranchRule = args.branching.parse().map_err(param)?;
    if !(cli.time_limit > 0.0) {
        return Err(param("--time-limit must be positive"));
    }
    let external = match args.solver.as_str() {
        "builtin" => None,
        "external" => Some(match &args.solver_cmd {
            Some(cmd) => ExternalSolver::new(cmd.clone())?,
            None => ExternalSolver::from_env()
                .ok_or_else(|| param("--solver external needs --solver-cmd or $FIREBREAK_SOLVER_CMD"))??,
        }),
        other => return Err(param(format!("unknown solver `{other}` (expected builtin or external)"))),
    };
    Ok(RunConfig {
        formulation,
        limits: SolveLimits {
            time_limit: Some(Duration::from_secs_f64(cli.time_limit)),
            engine,
            branching,
            ..SolveLimits::default()
        },
        external,
    })
}

fn validation_summary(instance: &Instance, plan: &firebreak_core::Plan) -> Result<String, Failure> {
    let v = check(instance, plan)?;
    if v.is_empty() {
        return Ok("validation: ok".into());
    }
    let lines: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    Err(Failure::Validation(format!("{} violations\n{}", v.len(), lines.join("\n"))))
}

fn cmd_solve(
    cli: &Cli,
    path: &Path,
    args: &SolverArgs,
    lp_out: Option<&Path>,
    plan_out: Option<&Path>,
    warm_start: Option<&Path>,
) -> Outcome {
    let instance = load_instance(path)?;
    let cfg = run_config(cli, args)?;
    if let Some(lp) = lp_out {
        let h = build_model(&instance, cfg.formulation)?;
        std::fs::write(lp, export_lp(&h.model)).map_err(Error::from)?;
    }
    let warm = warm_start.map(load_plan).transpose()?;
    let out = run_two_stage(&instance, &cfg, warm.as_ref())?;
    let s = &out.solution;
    let mut text = format!(
        "model {}: {} variables, {} rows\nstatus {}, objective {:.6}, bound {:.6}, nodes {}, {:.2} s\n",
        args.model,
        out.num_vars,
        out.num_rows,
        s.status.as_str(),
        s.objective,
        s.bound,
        s.stats.nodes,
        out.seconds
    );
    let ev = &out.evaluation;
    let scen: Vec<String> = ev.stage2_values.iter().map(|v| format!("{v}")).collect();
    text.push_str(&format!(
        "expected value {:.6} (stage 1 {}, scenarios {})\n",
        ev.expected_total,
        ev.stage1_value,
        scen.join(" / ")
    ));
    text.push_str(&format!("protected: {}\n", percentages_line(&report_percentages(&instance, &out.plan))));
    if let Some(p) = plan_out {
        let mut meta = Map::new();
        meta.insert("method".into(), json!(args.model));
        meta.insert("status".into(), json!(s.status.as_str()));
        meta.insert("objective".into(), json!(s.objective));
        let body = plan_to_string(&out.plan, Some(ev), meta)?;
        std::fs::write(p, body).map_err(Error::from)?;
    }
    let verdict = validation_summary(&instance, &out.plan);
    if let Ok(line) = &verdict {
        text.push_str(line);
        text.push('\n');
    }
    write_out(cli.out.as_deref(), &text)?;
    verdict.map(|_| ())
}

fn cmd_reroute(cli: &Cli, path: &Path, args: &SolverArgs, plan_out: Option<&Path>, report_out: Option<&Path>) -> Outcome {
    let instance = load_instance(path)?;
    let cfg = run_config(cli, args)?;
    let run = run_rerouting(&instance, &cfg)?;
    let r = &run.report;
    let mut text = String::new();
    if r.tie {
        text.push_str("note: equal scenario probabilities, scenario 1 planned first\n");
    }
    text.push_str(&format!(
        "first solve (scenario {}): {:.6}, second solve (scenario {}): {:.6}, {:.2} s\n",
        r.primary + 1,
        r.first_objective,
        r.secondary + 1,
        r.second_objective,
        run.seconds
    ));
    text.push_str(&format!(
        "expected value {:.6} (three-set accounting {:.6})\n",
        run.evaluation.expected_total, r.literal_expected_value
    ));
    text.push_str(&format!("protected: {}\n", percentages_line(&report_percentages(&instance, &run.plan))));
    if let Some(p) = plan_out {
        let mut meta = Map::new();
        meta.insert("method".into(), json!("rerouting"));
        let body = plan_to_string(&run.plan, Some(&run.evaluation), meta)?;
        std::fs::write(p, body).map_err(Error::from)?;
    }
    if let Some(p) = report_out {
        let positions: Vec<Value> = r
            .positions
            .iter()
            .map(|g| json!({"node": g.node, "release": g.release, "vtype": g.vtype, "count": g.count}))
            .collect();
        let body = json!({
            "primary_scenario": r.primary + 1,
            "secondary_scenario": r.secondary + 1,
            "tie": r.tie,
            "first_objective": r.first_objective,
            "second_objective": r.second_objective,
            "visited": r.visited,
            "positions": positions,
            "expected_value": r.expected_value,
            "literal_expected_value": r.literal_expected_value,
            "first_seconds": r.first_seconds,
            "second_seconds": r.second_seconds,
        });
        let text = firebreak_core::io::to_canonical_json(&body)?;
        std::fs::write(p, text).map_err(Error::from)?;
    }
    let verdict = validation_summary(&instance, &run.plan);
    if let Ok(line) = &verdict {
        text.push_str(line);
        text.push('\n');
    }
    write_out(cli.out.as_deref(), &text)?;
    verdict.map(|_| ())
}

fn cmd_validate(cli: &Cli, instance: &Path, plan: &Path) -> Outcome {
    let instance = load_instance(instance)?;
    let plan = load_plan(plan)?;
    let ev = evaluate(&instance, &plan)?;
    let violations = check(&instance, &plan)?;
    let mut text = format!("expected value {:.6}\n", ev.expected_total);
    for v in &violations {
        text.push_str(&format!("{v}\n"));
    }
    text.push_str(&format!("{} violations\n", violations.len()));
    write_out(cli.out.as_deref(), &text)?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(String::new()))
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Generate { assets, fleet, params } => {
            let mut p = generator_params(cli, params)?;
            p.n_assets = *assets;
            p.fleet = parse_fleet(fleet)?.counts;
            let inst = generate(&p)?;
            write_out(cli.out.as_deref(), &instance_to_string(&inst)?)?;
            Ok(())
        }
        Command::Casestudy => {
            write_out(cli.out.as_deref(), &instance_to_string(&black_saturday()?)?)?;
            Ok(())
        }
        Command::Solve {
            instance,
            solver,
            lp_out,
            plan_out,
            warm_start,
        } => cmd_solve(cli, instance, solver, lp_out.as_deref(), plan_out.as_deref(), warm_start.as_deref()),
        Command::Reroute {
            instance,
            solver,
            plan_out,
            report_out,
        } => cmd_reroute(cli, instance, solver, plan_out.as_deref(), report_out.as_deref()),
        Command::Validate { instance, plan } => cmd_validate(cli, instance, plan),
        Command::Compare {
            fleets,
            sizes,
            seeds,
            instances,
            params,
            solver,
        } => {
            let cfg = run_config(cli, solver)?;
            let base = generator_params(cli, params)?;
            let mut jobs = Vec::new();
            if instances.is_empty() {
                for fleet in fleets {
                    for &n in sizes {
                        for k in 0..*seeds {
                            jobs.push(CompareJob::generated(fleet, n, cli.seed + k, &base)?);
                        }
                    }
                }
            } else {
                for p in instances {
                    jobs.push(CompareJob::loaded(load_instance(p)?));
                }
            }
            let workers = cli
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = compare_batch(&jobs, &cfg, workers);
            write_out(cli.out.as_deref(), &comparison_csv(&rows))?;
            Ok(())
        }
        Command::Firemap { step, assets, params } => {
            let mut p = generator_params(cli, params)?;
            let text = match assets {
                Some(n) => {
                    p.n_assets = *n;
                    firemap_assets(&p)?
                }
                None => firemap_grid(&p, *step)?,
            };
            write_out(cli.out.as_deref(), &text)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(Failure::Validation(msg)) => {
            if !msg.is_empty() {
                eprintln!("{msg}");
            }
            EXIT_VALIDATION
        }
    };
    ExitCode::from(code as u8)
}
