mod common;

use common::{instance, Site};
use firebreak_core::plan::{evaluate, Plan, Visit};
use firebreak_core::report::{comparison_csv, report_percentages, ComparisonRow, MethodResult, Percentages, CSV_HEADER};

fn two_sites() -> firebreak_core::Instance {
    instance(
        &[1],
        &[0.6, 0.4],
        2.0,
        30.0,
        vec![
            Site::new((15.0, 0.0), 10.0, &[1]).stage1(0.0, 1.5),
            Site::new((0.0, 15.0), 10.0, &[1]).scenario(0, 2.0, 3.0),
        ],
    )
}

#[test]
fn empty_plan_is_worth_nothing() {
    let inst = two_sites();
    let plan = Plan::empty(&inst);
    assert_eq!(evaluate(&inst, &plan).unwrap().expected_total, 0.0);
    let p = report_percentages(&inst, &plan);
    assert_eq!(p.stage1, Some(0.0));
    assert_eq!(p.scenarios, vec![Some(0.0), None]);
}

#[test]
fn stage1_and_scenario_values() {
    let inst = two_sites();
    let mut plan = Plan::empty(&inst);
    plan.vehicles[0].stage1.push(Visit { node: 1, start: 0.5 });
    plan.serviced_from_visits(2);
    assert!((evaluate(&inst, &plan).unwrap().expected_total - 10.0).abs() < 1e-12);
    plan.vehicles[0].stage2[0].push(Visit { node: 2, start: 2.0 });
    plan.serviced_from_visits(2);
    let ev = evaluate(&inst, &plan).unwrap();
    assert!((ev.expected_total - 16.0).abs() < 1e-12);
    assert_eq!(ev.stage2_values, vec![10.0, 0.0]);
    let p = report_percentages(&inst, &plan);
    assert_eq!(p.stage1, Some(100.0));
    assert_eq!(p.scenarios[0], Some(100.0));
}

#[test]
fn evaluation_scales_with_values() {
    let inst = two_sites();
    let mut plan = Plan::empty(&inst);
    plan.stage1_serviced = vec![1];
    plan.stage2_serviced = vec![vec![2], vec![]];
    let base = evaluate(&inst, &plan).unwrap().expected_total;
    let mut scaled = inst.clone();
    for a in &mut scaled.assets {
        a.value *= 3.0;
    }
    assert!((evaluate(&scaled, &plan).unwrap().expected_total - 3.0 * base).abs() < 1e-9);
    let mut s1 = plan.clone();
    s1.stage2_serviced = vec![vec![], vec![]];
    let mut s2 = plan.clone();
    s2.stage1_serviced.clear();
    let sum = evaluate(&inst, &s1).unwrap().expected_total + evaluate(&inst, &s2).unwrap().expected_total;
    assert!((sum - base).abs() < 1e-12);
}

#[test]
fn unknown_asset_is_rejected() {
    let inst = two_sites();
    let mut plan = Plan::empty(&inst);
    plan.stage1_serviced = vec![7];
    assert!(evaluate(&inst, &plan).is_err());
}

#[test]
fn csv_has_header_gap_and_na() {
    let m = |total| MethodResult {
        percentages: Percentages { stage1: Some(100.0), scenarios: vec![Some(50.0), None] },
        total,
        seconds: 1.0,
    };
    let rows = vec![
        ComparisonRow {
            fleet: "set1".into(),
            assets: 20,
            seed: Some(3),
            two_stage: Some(m(110.0)),
            rerouting: Some(m(100.0)),
            status: "ok".into(),
        },
        ComparisonRow {
            fleet: "set1".into(),
            assets: 20,
            seed: Some(4),
            two_stage: None,
            rerouting: Some(m(100.0)),
            status: "time limit".into(),
        },
    ];
    assert!((rows[0].gap().unwrap() - 10.0).abs() < 1e-12);
    let csv = comparison_csv(&rows);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("set1,20,3,100.00,50.00,NA,110.00,"));
    assert!(lines[1].contains(",10.00,ok"));
    assert!(lines[2].contains("NA,NA,NA,NA,NA"));
}
