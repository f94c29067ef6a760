//! Protected-value percentages and the method comparison table.

use std::fmt::Write as _;

use crate::instance::Instance;
use crate::plan::Plan;

/// Percent of at-risk value protected in stage 1 and in each scenario; `None` for an empty pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Percentages {
    pub stage1: Option<f64>,
    pub scenarios: Vec<Option<f64>>,
}

fn pct(protected: f64, pool: f64) -> Option<f64> {
    (pool > 0.0).then(|| 100.0 * protected / pool)
}

/// Pools are the assets with a window in stage 1 or in the scenario; an asset at risk in
/// several scenarios belongs to each of their pools.
pub fn report_percentages(instance: &Instance, plan: &Plan) -> Percentages {
    let value = |i: usize| instance.asset(i).value;
    let pool1: f64 = instance.stage1_assets().into_iter().map(value).sum();
    let got1: f64 = plan.stage1_serviced.iter().map(|&i| value(i)).sum();
    let scenarios = (0..instance.num_scenarios())
        .map(|c| {
            let pool: f64 = instance.scenario_assets(c).into_iter().map(value).sum();
            let got: f64 = plan.stage2_serviced[c].iter().map(|&i| value(i)).sum();
            pct(got, pool)
        })
        .collect();
    Percentages {
        stage1: pct(got1, pool1),
        scenarios,
    }
}

/// One method's columns of a comparison row.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub percentages: Percentages,
    pub total: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub fleet: String,
    pub assets: usize,
    pub seed: Option<u64>,
    pub two_stage: Option<MethodResult>,
    pub rerouting: Option<MethodResult>,
    /// `ok`, or what went wrong.
    pub status: String,
}

impl ComparisonRow {
    /// (TS - DR) / DR x 100.
    pub fn gap(&self) -> Option<f64> {
        let ts = self.two_stage.as_ref()?.total;
        let dr = self.rerouting.as_ref()?.total;
        (dr > 0.0).then(|| (ts - dr) / dr * 100.0)
    }
}

pub const CSV_HEADER: &str = "fleet,assets,seed,\
ts_stage1_pct,ts_scenario1_pct,ts_scenario2_pct,ts_total,ts_time_s,\
dr_stage1_pct,dr_scenario1_pct,dr_scenario2_pct,dr_total,dr_time_s,gap_pct,status";

pub const GAP_FOOTER: &str = "# gap_pct = (ts_total - dr_total) / dr_total * 100";

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{:.2}", if v == 0.0 { 0.0 } else { v }),
        _ => "NA".into(),
    }
}

fn method_cells(m: Option<&MethodResult>) -> [String; 5] {
    match m {
        None => std::array::from_fn(|_| "NA".to_string()),
        Some(m) => [
            num(m.percentages.stage1),
            num(m.percentages.scenarios.first().copied().flatten()),
            num(m.percentages.scenarios.get(1).copied().flatten()),
            num(Some(m.total)),
            num(Some(m.seconds)),
        ],
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let mut cells = vec![
            csv_field(&r.fleet),
            r.assets.to_string(),
            r.seed.map_or("NA".into(), |s| s.to_string()),
        ];
        cells.extend(method_cells(r.two_stage.as_ref()));
        cells.extend(method_cells(r.rerouting.as_ref()));
        cells.push(num(r.gap()));
        cells.push(csv_field(&r.status));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out.push_str(GAP_FOOTER);
    out.push('\n');
    out
}
