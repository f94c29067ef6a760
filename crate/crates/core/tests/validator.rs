mod common;

use common::{instance, Site};
use firebreak_core::generator::{generate, micro_params};
use firebreak_core::multiscenario::plan_to_assignment;
use firebreak_core::plan::{evaluate, Plan, Visit};
use firebreak_core::rerouting::dynamic_reroute;
use firebreak_core::solve::{build_model, solve, Formulation, SolveOptions};
use firebreak_core::validator::{brute_force, brute_force_optimum, check, ViolationCode};
use firebreak_core::Error;
use firebreak_milp::SolveLimits;

fn pair_instance() -> firebreak_core::Instance {
    instance(&[2], &[0.5, 0.5], 3.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[2]).stage1(1.0, 2.0)])
}

fn pair_plan(inst: &firebreak_core::Instance, starts: [f64; 2]) -> Plan {
    let mut plan = Plan::empty(inst);
    for (v, s) in plan.vehicles.iter_mut().zip(starts) {
        v.stage1.push(Visit { node: 1, start: s });
        v.staging_node = 1;
    }
    plan.serviced_from_visits(2);
    plan
}

fn codes(inst: &firebreak_core::Instance, plan: &Plan) -> Vec<ViolationCode> {
    check(inst, plan).unwrap().into_iter().map(|v| v.code).collect()
}

#[test]
fn valid_pair_plan_is_clean() {
    let inst = pair_instance();
    assert!(check(&inst, &pair_plan(&inst, [1.5, 1.5])).unwrap().is_empty());
}

#[test]
fn late_start_is_a_window_violation() {
    let inst = pair_instance();
    let found = codes(&inst, &pair_plan(&inst, [2.1, 2.1]));
    assert!(found.contains(&ViolationCode::Window), "{found:?}");
}

#[test]
fn missing_partner_is_a_sync_violation() {
    let inst = pair_instance();
    let mut plan = pair_plan(&inst, [1.5, 1.5]);
    plan.vehicles[1].stage1.clear();
    plan.vehicles[1].staging_node = 0;
    let found = codes(&inst, &plan);
    assert!(found.contains(&ViolationCode::Sync), "{found:?}");
}

#[test]
fn different_starts_are_a_sync_violation() {
    let inst = pair_instance();
    let found = codes(&inst, &pair_plan(&inst, [1.5, 1.7]));
    assert_eq!(found, vec![ViolationCode::Sync]);
}

#[test]
fn too_early_arrival_is_a_travel_violation() {
    let inst = pair_instance();
    // 15 km at 30 km/h cannot arrive before 0.5
    let inst2 = {
        let mut i = inst.clone();
        i.windows.stage1[0] = Some(firebreak_core::instance::Window::new(0.0, 2.0));
        i
    };
    let found = codes(&inst2, &pair_plan(&inst2, [0.2, 0.2]));
    assert!(found.contains(&ViolationCode::TravelTime), "{found:?}");
    let _ = inst;
}

#[test]
fn oracle_examples() {
    let one = instance(&[1], &[0.6, 0.4], 2.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[1]).stage1(0.0, 1.5)]);
    assert!((brute_force_optimum(&one).unwrap() - 10.0).abs() < 1e-12);
    let scen = instance(&[1], &[0.6, 0.4], 2.0, 30.0, vec![Site::new((15.0, 0.0), 10.0, &[1]).scenario(0, 2.0, 3.0)]);
    assert!((brute_force_optimum(&scen).unwrap() - 6.0).abs() < 1e-12);
    let r = brute_force(&scen).unwrap();
    assert!(check(&scen, &r.plan).unwrap().is_empty());
    assert!((evaluate(&scen, &r.plan).unwrap().expected_total - 6.0).abs() < 1e-12);
}

#[test]
fn oracle_refuses_large_instances() {
    let big = generate(&firebreak_core::generator::GeneratorParams {
        n_assets: 8,
        ..micro_params(0)
    })
    .unwrap();
    assert!(matches!(brute_force_optimum(&big), Err(Error::TooLarge(_))));
}

#[test]
fn model_plans_substitute_into_their_rows() {
    for seed in 0..20 {
        let inst = generate(&micro_params(seed)).unwrap();
        for formulation in [Formulation::TwoStage, Formulation::Multi] {
            let out = solve(
                &inst,
                &SolveOptions {
                    formulation,
                    ..SolveOptions::default()
                },
            )
            .unwrap();
            assert!(check(&inst, &out.plan).unwrap().is_empty());
            let h = build_model(&inst, formulation).unwrap();
            let values = plan_to_assignment(&h, &inst, &out.plan).unwrap();
            let rows = h.model.violated_rows(&values, 1e-6);
            assert!(rows.is_empty(), "seed {seed}: {rows:?}");
            assert!((h.model.objective_value(&values) - out.solution.objective).abs() < 1e-6);
        }
    }
}

#[test]
fn oracle_dominates_valid_plans() {
    for seed in 0..15 {
        let inst = generate(&micro_params(seed)).unwrap();
        let best = brute_force_optimum(&inst).unwrap();
        let (plan, ev, _) = dynamic_reroute(&inst, &SolveLimits::default()).unwrap();
        assert!(check(&inst, &plan).unwrap().is_empty(), "seed {seed}");
        assert!(best >= ev.expected_total - 1e-6);
        assert!(best >= 0.0);
    }
}
