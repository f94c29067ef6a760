//! Single-scenario routing model and the dynamic rerouting baseline.
//!
//! The baseline plans for the more probable scenario from the depot, then replans the other
//! scenario's remaining assets from where the vehicles are at the staging time.

use std::collections::HashMap;

use firebreak_milp::{solve_exact, ConstraintSense, MilpModel, Solution, SolveLimits, VarId};

use crate::error::{Error, Result};
use crate::instance::{Instance, Window};
use crate::plan::{evaluate, Evaluation, Plan, VehicleId, Visit};

/// Vehicles of one type available at `node` from time `release`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginGroup {
    pub node: usize,
    pub release: f64,
    pub vtype: usize,
    pub count: u32,
}

/// A single-stage routing problem over a subset of assets.
#[derive(Debug, Clone)]
pub struct DeterministicProblem<'a> {
    pub instance: &'a Instance,
    /// (asset, window) pairs; each asset at most once.
    pub assets: Vec<(usize, Window)>,
    pub origins: Vec<OriginGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetArc {
    /// Origin group index when `from_group` is set, otherwise an asset node.
    pub from: usize,
    pub from_group: bool,
    pub to: usize,
    pub vtype: usize,
    pub x: VarId,
    pub z: VarId,
}

#[derive(Debug, Clone)]
pub struct DeterministicModel {
    pub model: MilpModel,
    /// Indexed like `DeterministicProblem::assets`.
    pub y: Vec<VarId>,
    pub s: Vec<VarId>,
    pub arcs: Vec<DetArc>,
}

/// Builds the single-stage model. Vehicles leave their origin group no earlier than its
/// release time and end at the end depot.
pub fn build_deterministic(p: &DeterministicProblem) -> Result<DeterministicModel> {
    use ConstraintSense::{Eq, Le};
    let inst = p.instance;
    let sink = inst.end_node();
    let nq = inst.num_types();
    let mut m = MilpModel::new("deterministic");
    m.config.t_max = Some(inst.windows.horizon);
    let pos: HashMap<usize, usize> = p.assets.iter().enumerate().map(|(k, (j, _))| (*j, k)).collect();
    if pos.len() != p.assets.len() {
        return Err(Error::invalid("an asset is listed twice in the deterministic problem"));
    }
    let mut per_type = vec![0u32; nq];
    for g in &p.origins {
        per_type[g.vtype] += g.count;
    }

    let mut y = Vec::new();
    let mut s = Vec::new();
    for &(j, w) in &p.assets {
        let yv = m.add_binary(format!("Y[{j}]"))?;
        m.set_objective(yv, inst.asset(j).value);
        if (0..nq).any(|q| inst.requirement(j, q) > per_type[q]) {
            m.set_upper(yv, 0.0);
        }
        y.push(yv);
        s.push(m.add_continuous(format!("S[{j}]"), w.open, w.close)?);
    }

    let mut arcs = Vec::new();
    let x_ub = |q: usize, j: usize| -> f64 {
        if j == sink {
            per_type[q] as f64
        } else {
            per_type[q].min(inst.requirement(j, q)) as f64
        }
    };
    for (g, og) in p.origins.iter().enumerate() {
        if og.count == 0 {
            continue;
        }
        let q = og.vtype;
        for &(j, w) in &p.assets {
            if inst.requirement(j, q) == 0 || og.release + inst.t(q, og.node, j) > w.close + 1e-9 {
                continue;
            }
            let ub = x_ub(q, j).min(og.count as f64);
            let x = m.add_integer(format!("X_o[{g},{j}]"), 0.0, ub)?;
            let z = m.add_binary(format!("z_o[{g},{j}]"))?;
            arcs.push(DetArc { from: g, from_group: true, to: j, vtype: q, x, z });
        }
    }
    for q in 0..nq {
        if per_type[q] == 0 {
            continue;
        }
        for &(i, wi) in &p.assets {
            if inst.requirement(i, q) == 0 {
                continue;
            }
            for &(j, wj) in &p.assets {
                if i == j
                    || inst.requirement(j, q) == 0
                    || wi.open + inst.service(i) + inst.t(q, i, j) > wj.close + 1e-9
                {
                    continue;
                }
                let x = m.add_integer(format!("X[{i},{j},{}]", q + 1), 0.0, x_ub(q, j))?;
                let z = m.add_binary(format!("z[{i},{j},{}]", q + 1))?;
                arcs.push(DetArc { from: i, from_group: false, to: j, vtype: q, x, z });
            }
            let x = m.add_integer(format!("X[{i},{sink},{}]", q + 1), 0.0, x_ub(q, sink))?;
            let z = m.add_binary(format!("z[{i},{sink},{}]", q + 1))?;
            arcs.push(DetArc { from: i, from_group: false, to: sink, vtype: q, x, z });
        }
    }

    // depot balance and per-group departure cap
    for q in 0..nq {
        let mut terms = Vec::new();
        for a in &arcs {
            if a.vtype != q {
                continue;
            }
            if a.from_group {
                terms.push((a.x, 1.0));
            }
            if a.to == sink {
                terms.push((a.x, -1.0));
            }
        }
        if !terms.is_empty() {
            m.add_constraint(format!("depot_balance[{}]", q + 1), terms, Eq, 0.0);
        }
    }
    for (g, og) in p.origins.iter().enumerate() {
        let terms: Vec<(VarId, f64)> = arcs
            .iter()
            .filter(|a| a.from_group && a.from == g)
            .map(|a| (a.x, 1.0))
            .collect();
        if !terms.is_empty() {
            m.add_constraint(format!("origin_cap[{g}]"), terms, Le, og.count as f64);
        }
    }
    for &(j, _) in &p.assets {
        for q in 0..nq {
            let mut flow = Vec::new();
            let mut sync = Vec::new();
            for a in &arcs {
                if a.vtype != q {
                    continue;
                }
                if a.to == j {
                    flow.push((a.x, 1.0));
                    sync.push((a.x, 1.0));
                }
                if !a.from_group && a.from == j {
                    flow.push((a.x, -1.0));
                }
            }
            if !flow.is_empty() {
                m.add_constraint(format!("flow[{j},{}]", q + 1), flow, Eq, 0.0);
            }
            let r = inst.requirement(j, q) as f64;
            let yv = y[pos[&j]];
            if r > 0.0 && m.variable(yv).upper > 0.0 {
                sync.push((yv, -r));
            }
            if !sync.is_empty() {
                m.add_constraint(format!("sync[{j},{}]", q + 1), sync, Eq, 0.0);
            }
        }
    }
    for a in arcs.clone() {
        let ub = m.variable(a.x).upper;
        let tag = if a.from_group { format!("o{}", a.from) } else { a.from.to_string() };
        m.add_constraint(
            format!("link[{tag},{},{}]", a.to, a.vtype + 1),
            [(a.x, 1.0), (a.z, -ub)],
            Le,
            0.0,
        );
        if a.to == sink {
            continue;
        }
        let sj = s[pos[&a.to]];
        let lo_j = m.variable(sj).lower;
        let name = format!("time[{tag},{},{}]", a.to, a.vtype + 1);
        if a.from_group {
            let og = p.origins[a.from];
            let need = og.release + inst.t(a.vtype, og.node, a.to);
            let big = need - lo_j;
            if big > 0.0 {
                m.add_constraint(name, [(sj, -1.0), (a.z, big)], Le, big - need);
            }
        } else {
            let si = s[pos[&a.from]];
            let travel = inst.t(a.vtype, a.from, a.to) + inst.service(a.from);
            let big = m.variable(si).upper + travel - lo_j;
            if big > 0.0 {
                m.add_constraint(name, [(si, 1.0), (sj, -1.0), (a.z, big)], Le, big - travel);
            }
        }
    }
    Ok(DeterministicModel { model: m, y, s, arcs })
}

/// A vehicle route from a deterministic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DetRoute {
    pub group: usize,
    pub visits: Vec<Visit>,
}

/// Splits the integer flows of a deterministic solution into one route per vehicle.
pub fn extract_routes(p: &DeterministicProblem, h: &DeterministicModel, sol: &Solution) -> Result<Vec<DetRoute>> {
    let sink = p.instance.end_node();
    let pos: HashMap<usize, usize> = p.assets.iter().enumerate().map(|(k, (j, _))| (*j, k)).collect();
    let mut residual: Vec<i64> = h.arcs.iter().map(|a| sol.value(a.x).round() as i64).collect();
    let start = |j: usize| sol.value(h.s[pos[&j]]);
    let mut routes = Vec::new();
    for (g, og) in p.origins.iter().enumerate() {
        for _ in 0..og.count {
            let mut visits = Vec::new();
            let mut cur: Option<usize> = None;
            loop {
                let pick = h
                    .arcs
                    .iter()
                    .enumerate()
                    .filter(|(k, a)| {
                        residual[*k] > 0
                            && a.vtype == og.vtype
                            && match cur {
                                None => a.from_group && a.from == g,
                                Some(i) => !a.from_group && a.from == i,
                            }
                    })
                    .min_by(|(_, a), (_, b)| {
                        let key = |j: usize| if j == sink { f64::INFINITY } else { start(j) };
                        key(a.to).total_cmp(&key(b.to)).then(a.to.cmp(&b.to))
                    })
                    .map(|(k, a)| (k, a.to));
                let Some((k, j)) = pick else { break };
                residual[k] -= 1;
                if j == sink {
                    break;
                }
                visits.push(Visit { node: j, start: start(j) });
                cur = Some(j);
            }
            routes.push(DetRoute { group: g, visits });
        }
    }
    if let Some(k) = residual.iter().position(|&r| r != 0) {
        let a = h.arcs[k];
        return Err(Error::Internal(format!(
            "deterministic flow not decomposable at arc {} -> {} (type {})",
            a.from,
            a.to,
            a.vtype + 1
        )));
    }
    Ok(routes)
}

/// Solves a deterministic problem and returns its optimum and vehicle routes.
pub fn solve_deterministic(p: &DeterministicProblem, limits: &SolveLimits) -> Result<(f64, Vec<DetRoute>, Solution)> {
    let h = build_deterministic(p)?;
    let sol = solve_exact(&h.model, limits)?;
    if !sol.status.has_solution() {
        return Err(Error::Solver(format!("deterministic solve ended with status {}", sol.status.as_str())));
    }
    let routes = extract_routes(p, &h, &sol)?;
    Ok((sol.objective, routes, sol))
}

/// Where each vehicle of a route set is at the staging time, and when it may move again.
///
/// Departures are as early as possible. A vehicle that reaches its next stop by `st` moves
/// there; it keeps going through stops whose service ends by `st`. A vehicle still on an arc
/// at `st` stays at the arc's start node and is released when it would have arrived.
pub fn staging_positions(
    instance: &Instance,
    origins: &[OriginGroup],
    routes: &[DetRoute],
    st: f64,
) -> Vec<OriginGroup> {
    routes
        .iter()
        .map(|r| {
            let og = origins[r.group];
            let q = og.vtype;
            let (mut cur, mut free) = (og.node, og.release);
            let mut release = st;
            for v in &r.visits {
                let arrive = free + instance.t(q, cur, v.node);
                if arrive > st {
                    release = arrive;
                    break;
                }
                cur = v.node;
                let end = v.start + instance.service(v.node);
                if end > st {
                    break;
                }
                free = end;
            }
            OriginGroup {
                node: cur,
                release: release.max(st),
                vtype: q,
                count: 1,
            }
        })
        .collect()
}

/// Merges vehicles with the same type, node and release time.
fn merge_groups(groups: &[OriginGroup]) -> (Vec<OriginGroup>, Vec<usize>) {
    let mut merged: Vec<OriginGroup> = Vec::new();
    let mut member = Vec::with_capacity(groups.len());
    for g in groups {
        match merged
            .iter()
            .position(|m| m.vtype == g.vtype && m.node == g.node && m.release == g.release)
        {
            Some(k) => {
                merged[k].count += g.count;
                member.push(k);
            }
            None => {
                merged.push(*g);
                member.push(merged.len() - 1);
            }
        }
    }
    (merged, member)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerouteReport {
    /// Scenario planned for first (0-based).
    pub primary: usize,
    pub secondary: usize,
    /// Set when both probabilities are equal and the first scenario was chosen.
    pub tie: bool,
    pub first_objective: f64,
    pub second_objective: f64,
    /// Assets serviced by the first solve.
    pub visited: Vec<usize>,
    pub positions: Vec<OriginGroup>,
    /// E(v) with every serviced asset credited by the scenario in which it was serviced.
    pub expected_value: f64,
    /// E(v) with the three-set accounting applied to all visited assets.
    pub literal_expected_value: f64,
    pub first_seconds: f64,
    pub second_seconds: f64,
}

fn clipped(instance: &Instance, c: usize, j: usize) -> Option<Window> {
    let w = instance.stage2_window(c, j)?;
    let open = w.open.max(instance.staging_time() - instance.service(j));
    (open <= w.close).then(|| Window::new(open, w.close))
}

/// Runs the two-solve rerouting baseline on a two-scenario instance.
pub fn dynamic_reroute(instance: &Instance, limits: &SolveLimits) -> Result<(Plan, Evaluation, RerouteReport)> {
    instance.validate()?;
    if instance.num_scenarios() != 2 {
        return Err(Error::invalid(format!(
            "dynamic rerouting needs exactly 2 scenarios, got {}",
            instance.num_scenarios()
        )));
    }
    let st = instance.staging_time();
    let (p1, p2) = (instance.scenarios.probability(0), instance.scenarios.probability(1));
    let tie = p1 == p2;
    let (a, b) = if p2 > p1 { (1, 0) } else { (0, 1) };
    if tie {
        log::info!("equal scenario probabilities; planning for scenario 1 first");
    }

    let stage1 = instance.stage1_assets();
    let mut first_assets: Vec<(usize, Window)> = stage1
        .iter()
        .map(|&j| (j, instance.stage1_window(j).expect("stage-1 window")))
        .collect();
    for j in instance.scenario_assets(a) {
        if stage1.contains(&j) {
            continue;
        }
        if let Some(w) = clipped(instance, a, j) {
            first_assets.push((j, w));
        }
    }
    let depot: Vec<OriginGroup> = (0..instance.num_types())
        .map(|q| OriginGroup {
            node: 0,
            release: 0.0,
            vtype: q,
            count: instance.fleet.depot_availability[q],
        })
        .collect();
    let first = DeterministicProblem {
        instance,
        assets: first_assets,
        origins: depot.clone(),
    };
    let t0 = std::time::Instant::now();
    let (first_obj, first_routes, _) = solve_deterministic(&first, limits)?;
    let first_seconds = t0.elapsed().as_secs_f64();
    let mut visited: Vec<usize> = first_routes.iter().flat_map(|r| r.visits.iter().map(|v| v.node)).collect();
    visited.sort_unstable();
    visited.dedup();

    let positions = staging_positions(instance, &depot, &first_routes, st);
    let (groups, member) = merge_groups(&positions);
    let second_assets: Vec<(usize, Window)> = instance
        .scenario_assets(b)
        .into_iter()
        .filter(|j| !visited.contains(j) && !stage1.contains(j))
        .filter_map(|j| clipped(instance, b, j).map(|w| (j, w)))
        .collect();
    let second = DeterministicProblem {
        instance,
        assets: second_assets,
        origins: groups.clone(),
    };
    let t1 = std::time::Instant::now();
    let (second_obj, second_routes, _) = solve_deterministic(&second, limits)?;
    let second_seconds = t1.elapsed().as_secs_f64();

    // first-solve route k belongs to vehicle k; second-solve routes are handed out to the
    // members of each merged group in order
    let mut plan = Plan::empty(instance);
    let ids: Vec<VehicleId> = plan.vehicles.iter().map(|v| v.vehicle).collect();
    let mut by_vehicle: HashMap<VehicleId, usize> = HashMap::new();
    {
        let mut next = vec![0usize; instance.num_types()];
        for (k, r) in first_routes.iter().enumerate() {
            let q = depot[r.group].vtype;
            let id = VehicleId { vtype: q, index: next[q] };
            next[q] += 1;
            by_vehicle.insert(id, k);
        }
    }
    let mut pending: Vec<Vec<&DetRoute>> = vec![Vec::new(); groups.len()];
    for r in &second_routes {
        pending[r.group].push(r);
    }
    for vp in plan.vehicles.iter_mut() {
        let k = by_vehicle[&vp.vehicle];
        let route = &first_routes[k];
        let split = route
            .visits
            .iter()
            .position(|v| !stage1.contains(&v.node))
            .unwrap_or(route.visits.len());
        vp.stage1 = route.visits[..split].to_vec();
        vp.staging_node = vp.stage1.last().map_or(0, |v| v.node);
        vp.stage2[a] = route.visits[split..].to_vec();
        let g = member[k];
        if let Some(r) = pending[g].pop() {
            vp.stage2[b] = r.visits.clone();
        }
    }
    debug_assert!(ids.len() == plan.vehicles.len());
    plan.serviced_from_visits(2);
    let evaluation = evaluate(instance, &plan)?;

    let pa = instance.scenarios.probability(a);
    let pb = instance.scenarios.probability(b);
    let mut literal = 0.0;
    let in_b: Vec<usize> = instance.scenario_assets(b);
    let in_a: Vec<usize> = instance.scenario_assets(a);
    let mut all_visited = visited.clone();
    all_visited.extend(second_routes.iter().flat_map(|r| r.visits.iter().map(|v| v.node)));
    all_visited.sort_unstable();
    all_visited.dedup();
    for &i in &all_visited {
        let v = instance.asset(i).value;
        if stage1.contains(&i) {
            literal += v;
            continue;
        }
        if in_a.contains(&i) {
            literal += pa * v;
        }
        if in_b.contains(&i) {
            literal += pb * v;
        }
    }

    let report = RerouteReport {
        primary: a,
        secondary: b,
        tie,
        first_objective: first_obj,
        second_objective: second_obj,
        visited,
        positions,
        expected_value: evaluation.expected_total,
        literal_expected_value: literal,
        first_seconds,
        second_seconds,
    };
    Ok((plan, evaluation, report))
}
