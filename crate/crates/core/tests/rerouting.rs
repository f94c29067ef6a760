mod common;

use common::{instance, Site};
use firebreak_core::generator::{generate, micro_params};
use firebreak_core::instance::Window;
use firebreak_core::plan::Visit;
use firebreak_core::rerouting::{dynamic_reroute, solve_deterministic, staging_positions, DetRoute, DeterministicProblem, OriginGroup};
use firebreak_core::solve::{solve, SolveOptions};
use firebreak_core::validator::{brute_force_optimum, check};
use firebreak_milp::SolveLimits;

fn line() -> firebreak_core::Instance {
    instance(
        &[1],
        &[0.5, 0.5],
        3.0,
        30.0,
        vec![
            Site::new((15.0, 0.0), 10.0, &[1]).stage1(0.0, 2.5),
            Site::new((30.0, 0.0), 5.0, &[1]).scenario(0, 3.0, 6.0),
        ],
    )
}

fn depot(count: u32) -> Vec<OriginGroup> {
    vec![OriginGroup { node: 0, release: 0.0, vtype: 0, count }]
}

#[test]
fn vehicle_on_an_arc_stays_at_its_departure() {
    let inst = line();
    let route = DetRoute {
        group: 0,
        visits: vec![Visit { node: 1, start: 2.4 }, Visit { node: 2, start: 3.4 }],
    };
    let pos = staging_positions(&inst, &depot(1), &[route], 3.0);
    assert_eq!(pos[0].node, 1);
    assert!((pos[0].release - 3.4).abs() < 1e-12);
}

#[test]
fn idle_vehicle_is_at_the_depot() {
    let inst = line();
    let route = DetRoute { group: 0, visits: vec![] };
    let pos = staging_positions(&inst, &depot(1), &[route], 3.0);
    assert_eq!((pos[0].node, pos[0].release), (0, 3.0));
}

#[test]
fn arrival_at_the_staging_time_counts_as_there() {
    let inst = line();
    let origins = vec![OriginGroup { node: 0, release: 2.5, vtype: 0, count: 1 }];
    let route = DetRoute {
        group: 0,
        visits: vec![Visit { node: 1, start: 3.0 }],
    };
    let pos = staging_positions(&inst, &origins, &[route], 3.0);
    assert_eq!((pos[0].node, pos[0].release), (1, 3.0));
}

#[test]
fn single_asset_deterministic() {
    let inst = instance(&[1], &[1.0], 2.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[1]).stage1(0.0, 1.5)]);
    let p = DeterministicProblem {
        instance: &inst,
        assets: vec![(1, Window::new(0.0, 1.5))],
        origins: depot(1),
    };
    let (obj, routes, _) = solve_deterministic(&p, &SolveLimits::default()).unwrap();
    assert!((obj - 10.0).abs() < 1e-9);
    assert_eq!(routes.iter().map(|r| r.visits.len()).sum::<usize>(), 1);
}

#[test]
fn unmet_requirement_gives_nothing() {
    let inst = instance(&[1], &[1.0], 2.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[2]).stage1(0.0, 1.5)]);
    let p = DeterministicProblem {
        instance: &inst,
        assets: vec![(1, Window::new(0.0, 1.5))],
        origins: depot(1),
    };
    let (obj, _, _) = solve_deterministic(&p, &SolveLimits::default()).unwrap();
    assert_eq!(obj, 0.0);
}

#[test]
fn single_stage1_asset_reroute() {
    let inst = instance(&[1], &[0.6, 0.4], 2.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[1]).stage1(0.0, 1.5)]);
    let (plan, ev, report) = dynamic_reroute(&inst, &SolveLimits::default()).unwrap();
    assert!((ev.expected_total - 10.0).abs() < 1e-9);
    assert!((report.expected_value - 10.0).abs() < 1e-9);
    assert!(!report.tie);
    assert!(check(&inst, &plan).unwrap().is_empty());
}

#[test]
fn equal_probabilities_are_flagged() {
    let (_, _, report) = dynamic_reroute(&line(), &SolveLimits::default()).unwrap();
    assert!(report.tie);
    assert_eq!((report.primary, report.secondary), (0, 1));
}

#[test]
fn more_likely_scenario_is_planned_first() {
    let inst = instance(
        &[1],
        &[0.3, 0.7],
        3.0,
        30.0,
        vec![Site::new((30.0, 0.0), 5.0, &[1]).scenario(1, 3.0, 6.0)],
    );
    let (plan, _, report) = dynamic_reroute(&inst, &SolveLimits::default()).unwrap();
    assert_eq!(report.primary, 1);
    assert_eq!(plan.stage2_serviced[1], vec![1]);
}

#[test]
fn assets_visited_first_are_not_rerouted_again() {
    for seed in 0..12 {
        let inst = generate(&micro_params(seed)).unwrap();
        let (plan, _, report) = dynamic_reroute(&inst, &SolveLimits::default()).unwrap();
        for &j in &report.visited {
            assert!(!plan.stage2_serviced[report.secondary].contains(&j), "seed {seed}: asset {j}");
        }
    }
}

#[test]
fn two_stage_dominates_rerouting_on_micro_instances() {
    for seed in 0..20 {
        let inst = generate(&micro_params(seed)).unwrap();
        let (plan, ev, report) = dynamic_reroute(&inst, &SolveLimits::default()).unwrap();
        assert!(check(&inst, &plan).unwrap().is_empty(), "seed {seed}");
        assert!((ev.expected_total - report.expected_value).abs() < 1e-9);
        let ts = solve(&inst, &SolveOptions::default()).unwrap();
        assert!(ts.solution.objective >= ev.expected_total - 1e-6, "seed {seed}");
        assert!(ts.solution.objective <= brute_force_optimum(&inst).unwrap() + 1e-6);
    }
}
