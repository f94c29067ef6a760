//! Pipelines behind the `firebreak` commands.

use std::time::Instant;

use firebreak_core::firespread::{classify_impacts, impact_table};
use firebreak_core::generator::{generate, parse_fleet, GeneratorParams};
use firebreak_core::instance::Point;
use firebreak_core::io::format_float;
use firebreak_core::plan::{Evaluation, Plan};
use firebreak_core::report::{report_percentages, ComparisonRow, MethodResult, Percentages};
use firebreak_core::rerouting::{dynamic_reroute, RerouteReport};
use firebreak_core::solve::{solve, Formulation, SolveOptions, SolveOutcome};
use firebreak_core::validator::check;
use firebreak_core::{Error, Instance, Result};
use firebreak_milp::{ExternalSolver, SolveLimits};

/// Exit codes of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Milp(_) | Error::Solver(_) | Error::Internal(_) => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub formulation: Formulation,
    pub limits: SolveLimits,
    pub external: Option<ExternalSolver>,
}

pub struct RerouteRun {
    pub plan: Plan,
    pub evaluation: Evaluation,
    pub report: RerouteReport,
    pub seconds: f64,
}

pub fn run_rerouting(instance: &Instance, cfg: &RunConfig) -> Result<RerouteRun> {
    let started = Instant::now();
    let (plan, evaluation, report) = dynamic_reroute(instance, &cfg.limits)?;
    Ok(RerouteRun {
        plan,
        evaluation,
        report,
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn run_two_stage(instance: &Instance, cfg: &RunConfig, warm_start: Option<&Plan>) -> Result<SolveOutcome> {
    solve(
        instance,
        &SolveOptions {
            formulation: cfg.formulation,
            limits: cfg.limits.clone(),
            external: cfg.external.clone(),
            warm_start: warm_start.cloned(),
        },
    )
}

/// One comparison job: a generated instance, or a loaded one when `instance` is set.
#[derive(Debug, Clone)]
pub struct CompareJob {
    pub fleet: String,
    pub assets: usize,
    pub seed: Option<u64>,
    pub instance: Option<Instance>,
    pub params: GeneratorParams,
}

impl CompareJob {
    pub fn generated(fleet: &str, assets: usize, seed: u64, base: &GeneratorParams) -> Result<Self> {
        let mut params = base.clone();
        params.fleet = parse_fleet(fleet)?.counts;
        params.n_assets = assets;
        params.seed = seed;
        Ok(Self {
            fleet: fleet.to_string(),
            assets,
            seed: Some(seed),
            instance: None,
            params,
        })
    }

    pub fn loaded(instance: Instance) -> Self {
        let fleet = instance
            .fleet
            .counts
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join("-");
        Self {
            fleet,
            assets: instance.n(),
            seed: instance.meta.seed,
            instance: Some(instance),
            params: GeneratorParams::default(),
        }
    }
}

fn method(instance: &Instance, plan: &Plan, total: f64, seconds: f64) -> MethodResult {
    MethodResult {
        percentages: report_percentages(instance, plan),
        total,
        seconds,
    }
}

fn validated(instance: &Instance, plan: &Plan, who: &str) -> std::result::Result<(), String> {
    match check(instance, plan) {
        Ok(v) if v.is_empty() => Ok(()),
        Ok(v) => Err(format!("{who} plan invalid: {}", v[0])),
        Err(e) => Err(format!("{who} plan invalid: {e}")),
    }
}

/// Runs rerouting, then the two-stage model warm-started from the rerouting plan.
pub fn compare_instance(job: &CompareJob, cfg: &RunConfig) -> ComparisonRow {
    let mut row = ComparisonRow {
        fleet: job.fleet.clone(),
        assets: job.assets,
        seed: job.seed,
        two_stage: None,
        rerouting: None,
        status: "ok".into(),
    };
    let instance = match &job.instance {
        Some(i) => i.clone(),
        None => match generate(&job.params) {
            Ok(i) => i,
            Err(e) => {
                row.status = format!("generate failed: {e}");
                return row;
            }
        },
    };
    let mut problems = Vec::new();
    let mut warm = None;
    match run_rerouting(&instance, cfg) {
        Ok(dr) => match validated(&instance, &dr.plan, "rerouting") {
            Ok(()) => {
                row.rerouting = Some(method(&instance, &dr.plan, dr.evaluation.expected_total, dr.seconds));
                warm = Some(dr.plan);
            }
            Err(msg) => problems.push(msg),
        },
        Err(e) => problems.push(format!("rerouting failed: {e}")),
    }
    match run_two_stage(&instance, cfg, warm.as_ref()) {
        Ok(ts) => match validated(&instance, &ts.plan, "two-stage") {
            Ok(()) => {
                if !ts.solution.is_optimal() {
                    problems.push(format!("two-stage {}", ts.solution.status.as_str()));
                }
                row.two_stage = Some(method(&instance, &ts.plan, ts.evaluation.expected_total, ts.seconds));
            }
            Err(msg) => problems.push(msg),
        },
        Err(e) => problems.push(format!("two-stage failed: {e}")),
    }
    if !problems.is_empty() {
        row.status = problems.join("; ");
    }
    row
}

/// Runs the jobs on up to `workers` threads; rows come back in job order.
pub fn compare_batch(jobs: &[CompareJob], cfg: &RunConfig, workers: usize) -> Vec<ComparisonRow> {
    use rayon::prelude::*;
    let run = || {
        jobs.par_iter()
            .map(|job| {
                let row = compare_instance(job, cfg);
                log::info!("{} n={} seed={:?}: {}", row.fleet, row.assets, row.seed, row.status);
                row
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => jobs.iter().map(|j| compare_instance(j, cfg)).collect(),
    }
}

pub fn percentages_line(p: &Percentages) -> String {
    let cell = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.2}%"));
    let mut parts = vec![format!("stage 1 {}", cell(p.stage1))];
    for (c, x) in p.scenarios.iter().enumerate() {
        parts.push(format!("scenario {} {}", c + 1, cell(*x)));
    }
    parts.join(", ")
}

/// Impact times and risk category on a square grid of the fire area.
pub fn firemap_grid(params: &GeneratorParams, step: f64) -> Result<String> {
    if !(step > 0.0) {
        return Err(Error::Param(format!("grid step must be positive, got {step}")));
    }
    params.validate()?;
    let cells = (params.grid_size / step).floor() as usize;
    let mut points = Vec::with_capacity((cells + 1) * (cells + 1));
    for iy in 0..=cells {
        for ix in 0..=cells {
            points.push(Point::new(ix as f64 * step, iy as f64 * step));
        }
    }
    Ok(firemap_rows(params, &points, None))
}

/// Impact times and risk category of the assets of a generated instance.
pub fn firemap_assets(params: &GeneratorParams) -> Result<String> {
    let instance = generate(params)?;
    let points: Vec<Point> = instance.assets.iter().map(|a| a.location).collect();
    let ids: Vec<usize> = instance.assets.iter().map(|a| a.id).collect();
    Ok(firemap_rows(params, &points, Some(&ids)))
}

fn firemap_rows(params: &GeneratorParams, points: &[Point], ids: Option<&[usize]>) -> String {
    let table = impact_table(points, &params.fire_model(), params.fire_horizon());
    let f = params.scenarios.len();
    let mut out = String::new();
    if ids.is_some() {
        out.push_str("asset,");
    }
    out.push_str("x,y");
    for c in 0..f {
        out.push_str(&format!(",impact_s{}", c + 1));
    }
    out.push_str(",category\n");
    for (k, (p, row)) in points.iter().zip(&table).enumerate() {
        if let Some(ids) = ids {
            out.push_str(&format!("{},", ids[k]));
        }
        out.push_str(&format!("{},{}", format_float(p.x), format_float(p.y)));
        for t in row {
            out.push(',');
            if let Some(t) = t {
                out.push_str(&format!("{t:.6}"));
            }
        }
        out.push_str(&format!(",{}\n", classify_impacts(row, params.staging_time).label()));
    }
    out
}
