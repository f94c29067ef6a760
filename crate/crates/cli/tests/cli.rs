use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn firebreak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_firebreak"))
        .args(args)
        .output()
        .expect("run firebreak")
}

fn tiny() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/tiny_2asset.json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = firebreak(&["generate", "--seed", "7", "--assets", "20", "--fleet", "set2", "--out", s(p)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let to_stdout = firebreak(&["generate", "--seed", "7", "--assets", "20", "--fleet", "set2"]);
    assert_eq!(to_stdout.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn solve_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let lp = dir.path().join("m.lp");
    let o = firebreak(&["solve", s(&tiny()), "--plan-out", s(&plan), "--lp-out", s(&lp)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("status optimal"), "{text}");
    assert!(text.contains("validation: ok"));
    assert!(text.contains("protected: stage 1"));
    assert!(std::fs::read_to_string(&lp).unwrap().starts_with("Maximize"));
    let v = firebreak(&["validate", s(&tiny()), s(&plan)]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("0 violations"));
}

#[test]
fn multi_model_gives_the_same_value() {
    let two = stdout(&firebreak(&["solve", s(&tiny())]));
    let multi = stdout(&firebreak(&["solve", s(&tiny()), "--model", "multi"]));
    let objective = |t: &str| t.lines().find(|l| l.starts_with("expected value")).unwrap().split(' ').nth(2).unwrap().to_string();
    assert_eq!(objective(&two), objective(&multi));
}

#[test]
fn broken_plan_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    assert!(firebreak(&["solve", s(&tiny()), "--plan-out", s(&plan)]).status.success());
    let text = std::fs::read_to_string(&plan).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut value = value;
    // claim a stage-1 visit that starts far too late
    let vehicles = value["vehicles"].as_array_mut().unwrap();
    let v = &mut vehicles[0];
    v["stage1"] = serde_json::json!([{"node": 1, "start": 50.0}]);
    v["staging_node"] = serde_json::json!(1);
    v["stage2"] = serde_json::json!([[], []]);
    value["serviced"]["stage1"] = serde_json::json!([1]);
    std::fs::write(&plan, serde_json::to_string(&value).unwrap()).unwrap();
    let o = firebreak(&["validate", s(&tiny()), s(&plan)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("WINDOW"));
}

#[test]
fn bad_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"assets\": 3}").unwrap();
    assert_eq!(firebreak(&["solve", s(&bad)]).status.code(), Some(3));
    assert_eq!(firebreak(&["solve", s(&tiny()), "--model", "nope"]).status.code(), Some(3));
    assert_eq!(firebreak(&["generate", "--fleet", "set9"]).status.code(), Some(3));
    assert_eq!(firebreak(&["generate", "--param", "speed"]).status.code(), Some(3));
}

#[test]
fn failing_external_solver_exits_2() {
    let o = firebreak(&["solve", s(&tiny()), "--solver", "external", "--solver-cmd", "false {lp} {sol}"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reroute_writes_plan_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("dr.json");
    let report = dir.path().join("report.json");
    let o = firebreak(&["reroute", s(&tiny()), "--plan-out", s(&plan), "--report-out", s(&report)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("validation: ok"));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["primary_scenario"], 1);
    assert!(firebreak(&["validate", s(&tiny()), s(&plan)]).status.success());
}

#[test]
fn compare_writes_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = firebreak(&[
        "compare", "--sizes", "6,8", "--seeds", "2", "--workers", "2", "--time-limit", "60", "--engine", "highs", "--out", s(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("fleet,assets,seed,ts_stage1_pct"));
    assert_eq!(lines.len(), 1 + 4 + 1);
    for row in &lines[1..5] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.last(), Some(&"ok"), "{row}");
        let gap: f64 = cells[cells.len() - 2].parse().unwrap();
        assert!(gap >= 0.0, "{row}");
    }
    assert!(lines[5].starts_with('#'));
}

#[test]
fn compare_on_a_file_where_everything_is_serviced() {
    let o = firebreak(&["compare", "--instances", s(&tiny())]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",0.00,ok"), "{row}");
}

#[test]
fn firemap_grid_and_assets() {
    let grid = stdout(&firebreak(&["firemap", "--step", "20"]));
    let lines: Vec<&str> = grid.lines().collect();
    assert_eq!(lines[0], "x,y,impact_s1,impact_s2,category");
    assert_eq!(lines.len(), 1 + 25);
    let assets = stdout(&firebreak(&["firemap", "--assets", "10", "--seed", "3"]));
    assert!(assets.starts_with("asset,x,y,"));
    assert_eq!(assets.lines().count(), 11);
}
