//! Piecewise elliptical fire growth, impact times and time windows.
//!
//! The front is an axis-aligned ellipse centred on the ignition point. Each semi-axis
//! grows linearly at the current phase's velocity and is continuous at phase changes.

use crate::error::{Error, Result};
use crate::instance::{Point, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirePhase {
    pub start_time: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FireModel {
    pub ignition: Point,
    /// Phase list per scenario; the first phase starts at 0 and is shared.
    pub phases: Vec<Vec<FirePhase>>,
}

impl FireModel {
    /// One initial phase, then for each scenario a single change `(time, vx, vy)`.
    pub fn with_changes(ignition: Point, initial: (f64, f64), changes: &[(f64, f64, f64)]) -> Self {
        let first = FirePhase {
            start_time: 0.0,
            vx: initial.0,
            vy: initial.1,
        };
        let phases = changes
            .iter()
            .map(|&(t, vx, vy)| {
                vec![
                    first,
                    FirePhase {
                        start_time: t,
                        vx,
                        vy,
                    },
                ]
            })
            .collect();
        Self { ignition, phases }
    }

    pub fn num_scenarios(&self) -> usize {
        self.phases.len()
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .phases
            .first()
            .and_then(|p| p.first())
            .ok_or_else(|| Error::Param("fire model has no phases".into()))?;
        for (c, list) in self.phases.iter().enumerate() {
            if list.first() != Some(first) || first.start_time != 0.0 {
                return Err(Error::Param(format!(
                    "scenario {} does not share the initial phase starting at 0",
                    c + 1
                )));
            }
            for p in list {
                if !(p.vx > 0.0 && p.vy > 0.0 && p.vx.is_finite() && p.vy.is_finite()) {
                    return Err(Error::Param("fire velocities must be positive".into()));
                }
            }
            if list.windows(2).any(|w| w[0].start_time >= w[1].start_time) {
                return Err(Error::Param(format!(
                    "phase start times of scenario {} are not increasing",
                    c + 1
                )));
            }
        }
        Ok(())
    }

    /// Semi-axes (Rx, Ry) at time `t` in scenario `c`.
    pub fn radii(&self, c: usize, t: f64) -> (f64, f64) {
        let mut rx = 0.0;
        let mut ry = 0.0;
        let list = &self.phases[c];
        for (k, p) in list.iter().enumerate() {
            if t <= p.start_time {
                break;
            }
            let end = list.get(k + 1).map_or(t, |n| n.start_time.min(t));
            rx += p.vx * (end - p.start_time);
            ry += p.vy * (end - p.start_time);
        }
        (rx, ry)
    }

    /// Ellipse inclusion predicate.
    pub fn inside(&self, c: usize, p: Point, t: f64) -> bool {
        let dx = p.x - self.ignition.x;
        let dy = p.y - self.ignition.y;
        if dx == 0.0 && dy == 0.0 {
            return true;
        }
        let (rx, ry) = self.radii(c, t);
        if rx <= 0.0 || ry <= 0.0 {
            return false;
        }
        (dx / rx).powi(2) + (dy / ry).powi(2) <= 1.0
    }
}

/// `(dx/(a+b s))^2 + (dy/(c+d s))^2 - 1`, decreasing in `s` where both axes are positive.
fn excess(dx: f64, dy: f64, a: f64, b: f64, c: f64, d: f64, s: f64) -> f64 {
    (dx / (a + b * s)).powi(2) + (dy / (c + d * s)).powi(2) - 1.0
}

/// Smallest `s` in `[0, s_max]` where the ellipse with axes `a + b s`, `c + d s`
/// reaches `(dx, dy)`. The caller guarantees the point is outside at `s = 0`
/// and inside at `s_max`.
fn solve_phase(dx: f64, dy: f64, a: f64, b: f64, c: f64, d: f64, s_max: f64) -> f64 {
    let (dx, dy) = (dx.abs(), dy.abs());
    if a == 0.0 && c == 0.0 {
        // both axes start at zero: t * sqrt(...) scaling is exact
        return ((dx / b).powi(2) + (dy / d).powi(2)).sqrt();
    }
    if dx == 0.0 {
        return ((dy - c) / d).clamp(0.0, s_max);
    }
    if dy == 0.0 {
        return ((dx - a) / b).clamp(0.0, s_max);
    }
    // dx^2 (c+ds)^2 + dy^2 (a+bs)^2 - (a+bs)^2 (c+ds)^2 = 0
    let (dx2, dy2) = (dx * dx, dy * dy);
    let u = [a * a, 2.0 * a * b, b * b];
    let v = [c * c, 2.0 * c * d, d * d];
    let mut uv = [0.0; 5];
    for i in 0..3 {
        for j in 0..3 {
            uv[i + j] += u[i] * v[j];
        }
    }
    let p = [
        dx2 * v[0] + dy2 * u[0] - uv[0],
        dx2 * v[1] + dy2 * u[1] - uv[1],
        dx2 * v[2] + dy2 * u[2] - uv[2],
        -uv[3],
        -uv[4],
    ];
    let tol = 1e-9 * (1.0 + s_max);
    let candidate = roots::find_roots_quartic(p[4], p[3], p[2], p[1], p[0])
        .as_ref()
        .iter()
        .copied()
        .filter(|s| s.is_finite() && *s >= -tol && *s <= s_max + tol)
        .fold(None, |best: Option<f64>, s| Some(best.map_or(s, |b| b.min(s))));
    let g = |s: f64| excess(dx, dy, a, b, c, d, s);
    let mut s = match candidate {
        Some(s) if g(s.clamp(0.0, s_max)).abs() < 1e-6 => s.clamp(0.0, s_max),
        _ => bracketed_root(&g, 0.0, s_max),
    };
    // Newton polish on the monotone excess function
    for _ in 0..4 {
        let h = 1e-7 * (1.0 + s);
        let slope = (g(s + h) - g(s - h)) / (2.0 * h);
        if slope >= 0.0 || !slope.is_finite() {
            break;
        }
        let next = (s - g(s) / slope).clamp(0.0, s_max);
        if (next - s).abs() < 1e-15 {
            break;
        }
        s = next;
    }
    s
}

/// Safeguarded root of a decreasing function with `g(lo) > 0 >= g(hi)`.
fn bracketed_root(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi) {
            break;
        }
    }
    hi
}

/// Earliest time at which the front of scenario `c` reaches `point`, if that
/// happens no later than `horizon`.
pub fn impact_time(point: Point, model: &FireModel, c: usize, horizon: f64) -> Option<f64> {
    let dx = point.x - model.ignition.x;
    let dy = point.y - model.ignition.y;
    if dx == 0.0 && dy == 0.0 {
        return Some(0.0);
    }
    let list = &model.phases[c];
    let mut rx = 0.0;
    let mut ry = 0.0;
    for (k, p) in list.iter().enumerate() {
        if p.start_time > horizon {
            break;
        }
        let end = list.get(k + 1).map_or(horizon, |n| n.start_time.min(horizon));
        let span = end - p.start_time;
        let rx_end = rx + p.vx * span;
        let ry_end = ry + p.vy * span;
        let inside_end = (dx / rx_end).powi(2) + (dy / ry_end).powi(2) <= 1.0;
        if inside_end {
            let s = solve_phase(dx, dy, rx, p.vx, ry, p.vy, span);
            return Some(p.start_time + s.min(span));
        }
        rx = rx_end;
        ry = ry_end;
    }
    None
}

/// Window lengths and service duration used to turn impact times into windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowParams {
    pub tw1: f64,
    pub tw2: f64,
    pub service: f64,
}

/// Asset/stage combination whose window would be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedWindow {
    pub asset: usize,
    /// `None` for stage 1, otherwise the scenario index.
    pub scenario: Option<usize>,
    pub impact: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedWindows {
    pub stage1: Vec<Option<Window>>,
    pub stage2: Vec<Vec<Option<Window>>>,
    pub dropped: Vec<DroppedWindow>,
}

/// Service window for an impact at `tau`: close = tau - a, open = max(0, close - tw).
pub fn window_for_impact(tau: f64, service: f64, tw: f64) -> Option<Window> {
    let close = tau - service;
    if close < 0.0 {
        return None;
    }
    Some(Window::new((close - tw).max(0.0), close))
}

/// Per-asset impact times, one entry per scenario.
pub fn impact_table(points: &[Point], model: &FireModel, horizon: f64) -> Vec<Vec<Option<f64>>> {
    points
        .iter()
        .map(|&p| {
            (0..model.num_scenarios())
                .map(|c| impact_time(p, model, c, horizon))
                .collect()
        })
        .collect()
}

/// Windows from impact times. `impacts[k][c]` belongs to asset k+1 in scenario c.
pub fn derive_windows(
    impacts: &[Vec<Option<f64>>],
    staging_time: f64,
    params: WindowParams,
) -> DerivedWindows {
    let n = impacts.len();
    let f = impacts.first().map_or(0, |r| r.len());
    let mut out = DerivedWindows {
        stage1: vec![None; n],
        stage2: vec![vec![None; n]; f],
        dropped: Vec::new(),
    };
    for (k, row) in impacts.iter().enumerate() {
        match stage1_impact(row, staging_time) {
            Some(tau) => {
                // close + a <= tau <= ST, so the staging-time clip is implied
                match window_for_impact(tau.min(staging_time), params.service, params.tw1) {
                    Some(w) => out.stage1[k] = Some(w),
                    None => out.dropped.push(DroppedWindow {
                        asset: k + 1,
                        scenario: None,
                        impact: tau,
                    }),
                }
            }
            None => {
                for (c, tau) in row.iter().enumerate() {
                    let Some(tau) = *tau else { continue };
                    if tau <= staging_time {
                        continue;
                    }
                    match window_for_impact(tau, params.service, params.tw2) {
                        Some(w) => out.stage2[c][k] = Some(w),
                        None => out.dropped.push(DroppedWindow {
                            asset: k + 1,
                            scenario: Some(c),
                            impact: tau,
                        }),
                    }
                }
            }
        }
    }
    out
}

const SAME_TIME_TOL: f64 = 1e-9;

/// Impact time if the asset burns before the staging time in every scenario alike.
fn stage1_impact(row: &[Option<f64>], staging_time: f64) -> Option<f64> {
    let first = (*row.first()?)?;
    if first > staging_time {
        return None;
    }
    row.iter()
        .all(|t| t.is_some_and(|t| (t - first).abs() <= SAME_TIME_TOL))
        .then_some(first)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiskCategory {
    Stage1,
    /// Impacted after the staging time under exactly one scenario.
    Scenario(usize),
    /// Impacted after the staging time under every scenario.
    AllScenarios,
    /// Impacted under a proper subset of two or more scenarios (only when F > 2).
    Subset(Vec<usize>),
    NotAtRisk,
}

impl RiskCategory {
    pub fn label(&self) -> String {
        match self {
            RiskCategory::Stage1 => "stage1".into(),
            RiskCategory::Scenario(c) => format!("scenario{}", c + 1),
            RiskCategory::AllScenarios => "both".into(),
            RiskCategory::Subset(s) => {
                let names: Vec<String> = s.iter().map(|c| (c + 1).to_string()).collect();
                format!("scenarios{}", names.join("+"))
            }
            RiskCategory::NotAtRisk => "not_at_risk".into(),
        }
    }
}

/// Category of one asset from its per-scenario impact times.
pub fn classify_impacts(row: &[Option<f64>], staging_time: f64) -> RiskCategory {
    if stage1_impact(row, staging_time).is_some() {
        return RiskCategory::Stage1;
    }
    let hit: Vec<usize> = row
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_some_and(|t| t > staging_time))
        .map(|(c, _)| c)
        .collect();
    match hit.len() {
        0 => RiskCategory::NotAtRisk,
        1 => RiskCategory::Scenario(hit[0]),
        k if k == row.len() => RiskCategory::AllScenarios,
        _ => RiskCategory::Subset(hit),
    }
}

/// Categories for a set of points.
pub fn classify(points: &[Point], model: &FireModel, staging_time: f64, horizon: f64) -> Vec<RiskCategory> {
    impact_table(points, model, horizon)
        .iter()
        .map(|row| classify_impacts(row, staging_time))
        .collect()
}
