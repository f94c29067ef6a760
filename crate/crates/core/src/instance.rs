//! Problem data: assets, fleet, scenarios, travel times and time windows.
//!
//! Node numbering: 0 is the start depot, assets are 1..=n, n+1 is the end depot.

use crate::error::{Error, Result};

pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    /// 1-based; equals the asset's node number.
    pub id: usize,
    pub location: Point,
    pub value: f64,
    pub service_duration: f64,
    /// Vehicles of each type needed simultaneously.
    pub requirements: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fleet {
    pub counts: Vec<u32>,
    /// Vehicles of each type stationed at the start depot.
    pub depot_availability: Vec<u32>,
}

impl Fleet {
    pub fn new(counts: Vec<u32>) -> Self {
        Self {
            depot_availability: counts.clone(),
            counts,
        }
    }

    pub fn num_types(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub probability: f64,
    pub occurrence_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub staging_time: f64,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn probability(&self, c: usize) -> f64 {
        self.scenarios[c].probability
    }
}

/// Dense travel times per vehicle type over all n+2 nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelMatrix {
    num_nodes: usize,
    times: Vec<Vec<f64>>,
}

impl TravelMatrix {
    pub fn new(num_nodes: usize, times: Vec<Vec<f64>>) -> Result<Self> {
        for (q, row) in times.iter().enumerate() {
            if row.len() != num_nodes * num_nodes {
                return Err(Error::invalid(format!(
                    "travel matrix for type {q} has {} entries, expected {}",
                    row.len(),
                    num_nodes * num_nodes
                )));
            }
        }
        Ok(Self { num_nodes, times })
    }

    /// Same times for every type, computed from a distance function.
    pub fn uniform(num_types: usize, num_nodes: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut row = Vec::with_capacity(num_nodes * num_nodes);
        for i in 0..num_nodes {
            for j in 0..num_nodes {
                row.push(if i == j { 0.0 } else { f(i, j) });
            }
        }
        Self {
            num_nodes,
            times: vec![row; num_types],
        }
    }

    #[inline]
    pub fn time(&self, q: usize, i: usize, j: usize) -> f64 {
        self.times[q][i * self.num_nodes + j]
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_types(&self) -> usize {
        self.times.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.times
    }

    pub fn max_time(&self) -> f64 {
        self.times
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub open: f64,
    pub close: f64,
}

impl Window {
    pub fn new(open: f64, close: f64) -> Self {
        Self { open, close }
    }

    pub fn contains(&self, t: f64, tol: f64) -> bool {
        t >= self.open - tol && t <= self.close + tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindows {
    pub horizon: f64,
    /// Indexed by asset id - 1.
    pub stage1: Vec<Option<Window>>,
    /// `stage2[c][id - 1]`.
    pub stage2: Vec<Vec<Option<Window>>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Meta {
    pub name: String,
    pub seed: Option<u64>,
    /// Generator parameters as written to the file.
    pub params: serde_json::Map<String, serde_json::Value>,
    pub category_retries: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub meta: Meta,
    pub assets: Vec<Asset>,
    pub start_depot: Point,
    pub end_depot: Point,
    pub fleet: Fleet,
    pub scenarios: ScenarioSet,
    pub travel: TravelMatrix,
    pub windows: TimeWindows,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.assets.len()
    }

    pub fn num_types(&self) -> usize {
        self.fleet.num_types()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn end_node(&self) -> usize {
        self.n() + 1
    }

    pub fn staging_time(&self) -> f64 {
        self.scenarios.staging_time
    }

    pub fn asset(&self, node: usize) -> &Asset {
        &self.assets[node - 1]
    }

    pub fn requirement(&self, node: usize, q: usize) -> u32 {
        self.assets[node - 1].requirements[q]
    }

    pub fn service(&self, node: usize) -> f64 {
        if node == 0 || node > self.n() {
            0.0
        } else {
            self.assets[node - 1].service_duration
        }
    }

    pub fn stage1_window(&self, node: usize) -> Option<Window> {
        self.windows.stage1[node - 1]
    }

    pub fn stage2_window(&self, c: usize, node: usize) -> Option<Window> {
        self.windows.stage2[c][node - 1]
    }

    pub fn t(&self, q: usize, i: usize, j: usize) -> f64 {
        self.travel.time(q, i, j)
    }

    pub fn location(&self, node: usize) -> Point {
        if node == 0 {
            self.start_depot
        } else if node > self.n() {
            self.end_depot
        } else {
            self.assets[node - 1].location
        }
    }

    /// Asset ids that can be serviced in stage 1.
    pub fn stage1_assets(&self) -> Vec<usize> {
        (1..=self.n())
            .filter(|&i| self.windows.stage1[i - 1].is_some())
            .collect()
    }

    /// Asset ids with a window in scenario `c`.
    pub fn scenario_assets(&self, c: usize) -> Vec<usize> {
        (1..=self.n())
            .filter(|&i| self.windows.stage2[c][i - 1].is_some())
            .collect()
    }

    /// Checks every structural and numeric invariant of the data model.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let nq = self.num_types();
        let check = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::invalid(msg)) };

        check(nq > 0, "fleet has no vehicle types".into())?;
        check(
            self.fleet.depot_availability.len() == nq,
            "depot_availability length differs from counts".into(),
        )?;
        for q in 0..nq {
            check(
                self.fleet.depot_availability[q] <= self.fleet.counts[q],
                format!("depot availability of type {q} exceeds its fleet count"),
            )?;
        }
        for p in [self.start_depot, self.end_depot] {
            check(
                p.x.is_finite() && p.y.is_finite(),
                "depot coordinate is not finite".into(),
            )?;
        }
        for (k, a) in self.assets.iter().enumerate() {
            check(a.id == k + 1, format!("asset #{k} has id {}, expected {}", a.id, k + 1))?;
            check(
                a.location.x.is_finite() && a.location.y.is_finite(),
                format!("asset {} has a non-finite coordinate", a.id),
            )?;
            check(
                a.value.is_finite() && a.value >= 0.0,
                format!("asset {} has invalid value {}", a.id, a.value),
            )?;
            check(
                a.service_duration.is_finite() && a.service_duration >= 0.0,
                format!("asset {} has invalid service duration", a.id),
            )?;
            check(
                a.requirements.len() == nq,
                format!(
                    "asset {} has {} requirement entries, expected {nq}",
                    a.id,
                    a.requirements.len()
                ),
            )?;
        }

        let sc = &self.scenarios;
        check(!sc.is_empty(), "scenario list is empty".into())?;
        check(
            sc.staging_time.is_finite() && sc.staging_time >= 0.0,
            "staging time must be finite and non-negative".into(),
        )?;
        let mut total = 0.0;
        for (c, s) in sc.scenarios.iter().enumerate() {
            check(
                s.probability.is_finite() && s.probability >= 0.0,
                format!("scenario {} has negative probability", c + 1),
            )?;
            check(
                s.occurrence_time.is_finite(),
                format!("scenario {} occurrence time is not finite", c + 1),
            )?;
            total += s.probability;
        }
        check(
            (total - 1.0).abs() <= PROB_TOL,
            format!("scenario probabilities sum to {total}, expected 1"),
        )?;
        check(
            (sc.scenarios[0].occurrence_time - sc.staging_time).abs() <= PROB_TOL,
            "first scenario must occur at the staging time".into(),
        )?;
        for w in sc.scenarios.windows(2) {
            check(
                w[0].occurrence_time < w[1].occurrence_time,
                "scenario occurrence times must be strictly increasing".into(),
            )?;
        }

        check(
            self.travel.num_nodes() == n + 2,
            format!(
                "travel matrix covers {} nodes, expected {}",
                self.travel.num_nodes(),
                n + 2
            ),
        )?;
        check(
            self.travel.num_types() == nq,
            "travel matrix type count differs from fleet".into(),
        )?;
        for q in 0..nq {
            for i in 0..n + 2 {
                check(
                    self.t(q, i, i) == 0.0,
                    format!("travel time from node {i} to itself is not 0"),
                )?;
                for j in 0..n + 2 {
                    let t = self.t(q, i, j);
                    check(
                        t.is_finite() && t >= 0.0,
                        format!("travel time {i}->{j} for type {q} is invalid"),
                    )?;
                }
            }
        }

        let w = &self.windows;
        let h = w.horizon;
        check(h.is_finite() && h > 0.0, "horizon must be positive".into())?;
        check(w.stage1.len() == n, "stage-1 window list has wrong length".into())?;
        check(
            w.stage2.len() == sc.len(),
            "stage-2 windows must have one list per scenario".into(),
        )?;
        let in_range = |win: &Window| win.open <= win.close && win.open >= 0.0 && win.close <= h;
        for (k, win) in w.stage1.iter().enumerate() {
            if let Some(win) = win {
                check(in_range(win), format!("stage-1 window of asset {} is invalid", k + 1))?;
                check(
                    win.close + self.assets[k].service_duration <= sc.staging_time + 1e-9,
                    format!("stage-1 window of asset {} ends after the staging time", k + 1),
                )?;
            }
        }
        for (c, list) in w.stage2.iter().enumerate() {
            check(
                list.len() == n,
                format!("stage-2 window list of scenario {} has wrong length", c + 1),
            )?;
            for (k, win) in list.iter().enumerate() {
                if let Some(win) = win {
                    check(
                        in_range(win),
                        format!("scenario {} window of asset {} is invalid", c + 1, k + 1),
                    )?;
                }
            }
        }
        for (k, a) in self.assets.iter().enumerate() {
            let at_risk = w.stage1[k].is_some() || w.stage2.iter().any(|l| l[k].is_some());
            check(
                !at_risk || a.requirements.iter().any(|&r| r > 0),
                format!("asset {} is at risk but requires no vehicles", a.id),
            )?;
        }
        Ok(())
    }
}
