use std::path::PathBuf;

use firebreak_core::casestudy::{black_saturday, tiny_two_asset};
use firebreak_core::firespread::RiskCategory;
use firebreak_core::generator::{categories, generate, micro_params, preset_fleet, GeneratorParams};
use firebreak_core::io::{instance_from_str, instance_to_string, load_instance, plan_from_str, plan_to_string, save_instance};
use firebreak_core::plan::{evaluate, Plan, Visit};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn bundled_files_match_their_builders() {
    for (file, inst) in [
        ("tiny_2asset.json", tiny_two_asset().unwrap()),
        ("blacksaturday.json", black_saturday().unwrap()),
    ] {
        let text = std::fs::read_to_string(data(file)).unwrap();
        assert_eq!(text, instance_to_string(&inst).unwrap(), "{file} is stale");
        assert_eq!(load_instance(data(file)).unwrap(), inst);
    }
}

#[test]
fn bundled_shapes() {
    let tiny = load_instance(data("tiny_2asset.json")).unwrap();
    assert_eq!((tiny.n(), tiny.num_types(), tiny.num_scenarios()), (2, 1, 2));
    let bs = load_instance(data("blacksaturday.json")).unwrap();
    assert_eq!(bs.n(), 25);
    assert_eq!(bs.fleet.counts, vec![5, 3, 2]);
    // asset 2 is impacted at 3.0 before the staging time
    let w = bs.stage1_window(2).unwrap();
    assert!((w.close - 2.5).abs() < 1e-12 && (w.open - 1.5).abs() < 1e-12);
    assert!(bs.stage1_window(3).is_none() && bs.stage2_window(0, 3).is_some() && bs.stage2_window(1, 3).is_some());
    assert!(bs.stage2_window(0, 5).is_some() && bs.stage2_window(1, 5).is_none());
}

#[test]
fn round_trip_is_byte_identical() {
    let tiny = tiny_two_asset().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    save_instance(&tiny, &path).unwrap();
    let first = std::fs::read_to_string(&path).unwrap();
    let back = load_instance(&path).unwrap();
    assert_eq!(back, tiny);
    save_instance(&back, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);

    let gen = generate(&GeneratorParams::default()).unwrap();
    let text = instance_to_string(&gen).unwrap();
    assert_eq!(instance_from_str(&text).unwrap(), gen);
}

#[test]
fn probabilities_must_sum_to_one() {
    let text = instance_to_string(&tiny_two_asset().unwrap()).unwrap();
    let bad = text.replacen("\"probability\": 0.6", "\"probability\": 0.7", 1);
    assert_ne!(bad, text);
    assert!(instance_from_str(&bad).is_err());
}

#[test]
fn non_finite_coordinates_are_refused() {
    let mut tiny = tiny_two_asset().unwrap();
    tiny.assets[0].location.x = f64::NAN;
    assert!(instance_to_string(&tiny).is_err());
}

#[test]
fn plan_round_trip() {
    let tiny = tiny_two_asset().unwrap();
    let mut plan = Plan::empty(&tiny);
    plan.vehicles[0].stage1.push(Visit { node: 1, start: 1.25 });
    plan.vehicles[0].staging_node = 1;
    plan.serviced_from_visits(2);
    let ev = evaluate(&tiny, &plan).unwrap();
    let text = plan_to_string(&plan, Some(&ev), Default::default()).unwrap();
    let (back, _) = plan_from_str(&text).unwrap();
    assert_eq!(back, plan);
}

#[test]
fn generation_is_deterministic() {
    let p = GeneratorParams {
        fleet: preset_fleet("set1").unwrap().counts,
        ..GeneratorParams::default()
    };
    let a = instance_to_string(&generate(&p).unwrap()).unwrap();
    let b = instance_to_string(&generate(&p).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = generate(&GeneratorParams { seed: 2, ..p.clone() }).unwrap();
    let first = generate(&p).unwrap();
    assert_ne!(first.assets[0].location, other.assets[0].location);
}

#[test]
fn default_instance_has_every_category() {
    let p = GeneratorParams::default();
    let inst = generate(&p).unwrap();
    let cats = categories(&p, &inst);
    assert_eq!(cats.len(), 50);
    for want in [RiskCategory::Stage1, RiskCategory::AllScenarios, RiskCategory::NotAtRisk] {
        assert!(cats.contains(&want), "missing {want:?}");
    }
    assert!(cats.iter().any(|c| matches!(c, RiskCategory::Scenario(_))));
    assert_eq!(inst.staging_time(), 4.5);
    for i in 1..=inst.n() {
        assert_eq!(inst.service(i), 0.5);
        for w in std::iter::once(inst.stage1_window(i)).chain((0..2).map(|c| inst.stage2_window(c, i))).flatten() {
            assert!(w.close - w.open <= 1.0 + 1e-9);
            assert!(w.open <= w.close && w.close <= inst.windows.horizon);
        }
    }
}

#[test]
fn micro_instances_fit_the_oracle() {
    for seed in 0..50 {
        let inst = generate(&micro_params(seed)).unwrap();
        assert!((2..=7).contains(&inst.n()));
        assert!(inst.fleet.total() <= 3);
        assert_eq!(inst.num_scenarios(), 2);
    }
}
