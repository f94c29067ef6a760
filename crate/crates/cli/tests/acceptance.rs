//! Acceptance run: one PASS/FAIL/SKIP line per criterion and a summary line.
//! Exits non-zero on a FAIL only when `ACCEPTANCE_STRICT=1`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use firebreak_core::casestudy::black_saturday;
use firebreak_core::firespread::{impact_time, FireModel};
use firebreak_core::generator::{generate, micro_params, GeneratorParams};
use firebreak_core::instance::{Point, Window};
use firebreak_core::plan::{evaluate, Plan};
use firebreak_core::report::report_percentages;
use firebreak_core::rerouting::{dynamic_reroute, solve_deterministic, DeterministicProblem, OriginGroup};
use firebreak_core::solve::{build_model, solve, Formulation, SolveOptions, SolveOutcome};
use firebreak_core::validator::{brute_force_optimum, check};
use firebreak_core::Instance;
use firebreak_milp::{solve_exact, Engine, ExternalSolver, SolveLimits};
use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg32;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

/// Plans produced while checking criteria 1-3, with the objective reported for them.
struct Produced {
    instance: Instance,
    plan: Plan,
    objective: f64,
    source: String,
}

fn keep(out: &mut Vec<Produced>, instance: &Instance, o: &SolveOutcome, source: String) {
    out.push(Produced {
        instance: instance.clone(),
        plan: o.plan.clone(),
        objective: o.solution.objective,
        source,
    });
}

fn solve_with(instance: &Instance, formulation: Formulation) -> SolveOutcome {
    solve(
        instance,
        &SolveOptions {
            formulation,
            ..SolveOptions::default()
        },
    )
    .expect("solve")
}

fn criterion1(produced: &mut Vec<Produced>) -> Verdict {
    let started = Instant::now();
    let mut bad = Vec::new();
    for seed in 0..50 {
        let inst = generate(&micro_params(seed)).expect("micro instance");
        let oracle = brute_force_optimum(&inst).expect("oracle");
        let out = solve_with(&inst, Formulation::TwoStage);
        if !out.solution.is_optimal() || (out.solution.objective - oracle).abs() > 1e-6 {
            bad.push(format!("seed {seed}: {} vs {oracle}", out.solution.objective));
        }
        keep(produced, &inst, &out, format!("c1 seed {seed}"));
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        bad.is_empty() && secs < 120.0,
        format!("50 micro-instances, {} mismatches {:?}, {secs:.1} s", bad.len(), bad),
    )
}

fn highs(seconds: f64) -> SolveLimits {
    SolveLimits {
        engine: Engine::Highs,
        ..SolveLimits::with_time_limit(seconds)
    }
}

const BUCKETS: [(usize, u64); 6] = [(15, 4), (17, 3), (19, 3), (21, 3), (23, 3), (25, 4)];

fn criterion2() -> Verdict {
    let mut lines = Vec::new();
    let mut bucket_gaps = Vec::new();
    let mut all_gaps = Vec::new();
    let mut problems = Vec::new();
    for (n, seeds) in BUCKETS {
        let mut gaps = Vec::new();
        for seed in 1..=seeds {
            let params = GeneratorParams {
                n_assets: n,
                fleet: vec![3, 2, 2],
                seed,
                ..GeneratorParams::default()
            };
            let inst = generate(&params).expect("instance");
            let (dr_plan, dr, _) = dynamic_reroute(&inst, &highs(600.0)).expect("rerouting");
            let ts = solve(
                &inst,
                &SolveOptions {
                    limits: highs(600.0),
                    warm_start: Some(dr_plan.clone()),
                    ..SolveOptions::default()
                },
            )
            .expect("two-stage");
            let (ts_v, dr_v) = (ts.solution.objective, dr.expected_total);
            if !ts.solution.is_optimal() {
                problems.push(format!("n={n} seed={seed} not optimal"));
            }
            if ts_v < dr_v - 1e-6 {
                problems.push(format!("n={n} seed={seed}: TS {ts_v} < DR {dr_v}"));
            }
            for (who, plan) in [("TS", &ts.plan), ("DR", &dr_plan)] {
                if !check(&inst, plan).expect("check").is_empty() {
                    problems.push(format!("n={n} seed={seed}: {who} plan invalid"));
                }
            }
            let gap = if dr_v > 0.0 { (ts_v - dr_v) / dr_v * 100.0 } else { 0.0 };
            gaps.push(gap);
            all_gaps.push(gap);
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        lines.push(format!("n={n}: {mean:.2}%"));
        bucket_gaps.push(mean);
    }
    let inversions = bucket_gaps.windows(2).filter(|w| w[1] < w[0]).count();
    let mean = all_gaps.iter().sum::<f64>() / all_gaps.len() as f64;
    verdict(
        problems.is_empty() && mean > 0.0 && inversions <= 1,
        format!(
            "20 Set1 instances, mean gap {mean:.2}%, bucket means [{}], {inversions} inversions{}",
            lines.join(", "),
            if problems.is_empty() { String::new() } else { format!(", {problems:?}") }
        ),
    )
}

fn single_scenario(seed: u64) -> Instance {
    let mut scenarios = GeneratorParams::default().scenarios;
    scenarios.truncate(1);
    scenarios[0].probability = 1.0;
    generate(&GeneratorParams {
        scenarios,
        ..micro_params(seed)
    })
    .expect("instance")
}

fn deterministic_optimum(inst: &Instance) -> f64 {
    let st = inst.staging_time();
    let mut assets: Vec<(usize, Window)> = inst
        .stage1_assets()
        .into_iter()
        .map(|j| (j, inst.stage1_window(j).expect("window")))
        .collect();
    for j in inst.scenario_assets(0) {
        let w = inst.stage2_window(0, j).expect("window");
        let open = w.open.max(st - inst.service(j));
        if open <= w.close {
            assets.push((j, Window::new(open, w.close)));
        }
    }
    let origins = (0..inst.num_types())
        .map(|q| OriginGroup {
            node: 0,
            release: 0.0,
            vtype: q,
            count: inst.fleet.depot_availability[q],
        })
        .collect();
    let p = DeterministicProblem {
        instance: inst,
        assets,
        origins,
    };
    solve_deterministic(&p, &SolveLimits::default()).expect("deterministic").0
}

fn criterion3(produced: &mut Vec<Produced>) -> Verdict {
    let mut bad = Vec::new();
    for seed in 0..10 {
        let inst = single_scenario(seed);
        let det = deterministic_optimum(&inst);
        let out = solve_with(&inst, Formulation::TwoStage);
        if !out.solution.is_optimal() || (out.solution.objective - det).abs() > 1e-6 {
            bad.push(format!("(a) seed {seed}: {} vs {det}", out.solution.objective));
        }
        keep(produced, &inst, &out, format!("c3a seed {seed}"));
    }
    for seed in 0..20 {
        let inst = generate(&micro_params(seed)).expect("instance");
        let base = solve_with(&inst, Formulation::TwoStage);
        let multi = solve_with(&inst, Formulation::Multi);
        if !multi.solution.is_optimal() || (base.solution.objective - multi.solution.objective).abs() > 1e-6 {
            bad.push(format!("(b) seed {seed}: {} vs {}", multi.solution.objective, base.solution.objective));
        }
        keep(produced, &inst, &base, format!("c3b base seed {seed}"));
        keep(produced, &inst, &multi, format!("c3b multi seed {seed}"));
    }
    verdict(
        bad.is_empty(),
        format!("(a) F=1 vs deterministic on 10, (b) multi vs base on 20, mismatches {bad:?}"),
    )
}

const ST: f64 = 4.5;
const DELAY: f64 = 2.0;
const HORIZON: f64 = 10.0;

fn oracle_inside(c: usize, dx: f64, dy: f64, t: f64) -> bool {
    let (change, v) = if c == 0 { (ST, (19.0, 17.0)) } else { (ST + DELAY, (21.0, 19.0)) };
    let before = t.min(change);
    let after = (t - change).max(0.0);
    let (rx, ry) = (14.0 * before + v.0 * after, 16.0 * before + v.1 * after);
    if rx <= 0.0 {
        return dx == 0.0 && dy == 0.0;
    }
    (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0
}

fn bisection(c: usize, dx: f64, dy: f64) -> Option<f64> {
    if !oracle_inside(c, dx, dy, HORIZON) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, HORIZON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if oracle_inside(c, dx, dy, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn criterion4() -> Verdict {
    let model = FireModel::with_changes(Point::new(0.0, 0.0), (14.0, 16.0), &[(ST, 19.0, 17.0), (ST + DELAY, 21.0, 19.0)]);
    let mut rng = Pcg32::seed_from_u64(4);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst: f64 = 0.0;
    let mut disagreements = 0;
    for _ in 0..1000 {
        let p = Point::new(unit() * 320.0 - 160.0, unit() * 320.0 - 160.0);
        for c in 0..2 {
            match (impact_time(p, &model, c, HORIZON), bisection(c, p.x, p.y)) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                (None, None) => {}
                _ => disagreements += 1,
            }
        }
    }
    // continuity: radii of each scenario on both sides of its change
    let mut jump: f64 = 0.0;
    for (c, change) in [(0, ST), (1, ST + DELAY)] {
        for k in 0..36 {
            let a = k as f64 * std::f64::consts::PI / 18.0;
            let at = |t: f64| {
                let (mut lo, mut hi) = (0.0, 400.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if model.inside(c, Point::new(mid * a.cos(), mid * a.sin()), t) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            jump = jump.max((at(change - 1e-9) - at(change + 1e-9)).abs());
        }
    }
    verdict(
        worst < 1e-6 && disagreements == 0 && jump < 1e-6,
        format!("1000 points x 2 scenarios, max deviation {worst:.2e}, {disagreements} reach disagreements, boundary jump {jump:.2e}"),
    )
}

fn criterion5(produced: &[Produced]) -> Verdict {
    let mut bad = Vec::new();
    for p in produced {
        let violations = check(&p.instance, &p.plan).expect("check");
        let value = evaluate(&p.instance, &p.plan).expect("evaluate").expected_total;
        if !violations.is_empty() || (value - p.objective).abs() > 1e-6 {
            bad.push(format!("{}: {} violations, value {value} vs {}", p.source, violations.len(), p.objective));
        }
    }
    verdict(bad.is_empty(), format!("{} plans, problems {bad:?}", produced.len()))
}

fn criterion6() -> Verdict {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut files = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("gen{k}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_firebreak"))
            .args(["generate", "--seed", "1", "--assets", "50", "--fleet", "set1", "--out"])
            .arg(&path)
            .status()
            .expect("run firebreak");
        if !status.success() {
            return Verdict::Fail(format!("generate exited with {status}"));
        }
        files.push(std::fs::read(&path).expect("read output"));
    }
    verdict(
        files[0] == files[1] && !files[0].is_empty(),
        format!("two runs, {} bytes, identical: {}", files[0].len(), files[0] == files[1]),
    )
}

fn criterion7() -> Verdict {
    let inst = black_saturday().expect("case study");
    let started = Instant::now();
    let (dr_plan, _, _) = dynamic_reroute(&inst, &highs(600.0)).expect("rerouting");
    let out = solve(
        &inst,
        &SolveOptions {
            limits: SolveLimits {
                time_limit: Some(Duration::from_secs(3600)),
                ..highs(3600.0)
            },
            warm_start: Some(dr_plan),
            ..SolveOptions::default()
        },
    )
    .expect("solve");
    let secs = started.elapsed().as_secs_f64();
    let clean = check(&inst, &out.plan).expect("check").is_empty();
    let p = report_percentages(&inst, &out.plan);
    let cells: Vec<String> = std::iter::once(p.stage1)
        .chain(p.scenarios.iter().copied())
        .map(|x| x.map_or("n/a".into(), |v| format!("{v:.2}%")))
        .collect();
    verdict(
        out.solution.is_optimal() && clean && secs <= 3600.0 && cells.len() == 3,
        format!(
            "25 assets, builtin solver (highs engine) {} {:.3} (bound {:.3}) in {secs:.0} s, valid: {clean}, protected {}",
            out.solution.status.as_str(),
            out.solution.objective,
            out.solution.bound,
            cells.join(" / ")
        ),
    )
}

fn external_solver() -> Option<ExternalSolver> {
    if let Some(r) = ExternalSolver::from_env() {
        return r.ok();
    }
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py");
    let probe = Command::new("python3").args(["-c", "import highspy"]).output().ok()?;
    if !probe.status.success() || !script.exists() {
        return None;
    }
    ExternalSolver::new(format!("python3 '{}' {{lp}} {{sol}} {{time}}", script.display())).ok()
}

fn criterion8() -> Verdict {
    let Some(ext) = external_solver() else {
        return Verdict::Skip("no external solver configured".into());
    };
    let mut bad = Vec::new();
    for seed in 0..10 {
        let inst = generate(&micro_params(seed)).expect("instance");
        let h = build_model(&inst, Formulation::TwoStage).expect("model");
        let own = solve_exact(&h.model, &SolveLimits::default()).expect("builtin");
        match ext.solve(&h.model, Some(120.0)) {
            Ok(sol) if (sol.objective - own.objective).abs() <= 1e-6 => {}
            Ok(sol) => bad.push(format!("seed {seed}: {} vs {}", sol.objective, own.objective)),
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
    }
    verdict(bad.is_empty(), format!("10 micro-instances via `{}`, mismatches {bad:?}", ext.template))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut produced = Vec::new();
    let results = vec![
        ("1 oracle equivalence", criterion1(&mut produced)),
        ("2 dominance vs rerouting", criterion2()),
        ("3 reductions", criterion3(&mut produced)),
        ("4 fire spread", criterion4()),
        ("5 validation soundness", criterion5(&produced)),
        ("6 determinism", criterion6()),
        ("7 case study", criterion7()),
        ("8 LP bridge", criterion8()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        let (tag, detail) = match v {
            Verdict::Pass(d) => ("PASS", d),
            Verdict::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("criterion {name}: {tag} - {detail}");
    }
    let skipped = results.iter().filter(|(_, v)| matches!(v, Verdict::Skip(_))).count();
    println!(
        "acceptance: {} passed, {failed} failed, {skipped} skipped",
        results.len() - failed - skipped
    );
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
