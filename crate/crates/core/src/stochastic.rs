//! Two-stage stochastic MILP: arc preprocessing, model construction and plan extraction.

use std::collections::HashMap;

use firebreak_milp::{ConstraintSense, MilpModel, Solution, VarId};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::plan::{Plan, Visit};

const ARC_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub vtype: usize,
}

/// Feasible arcs per decision context: stage 1, then one list per scenario.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcSets {
    pub first: Vec<Arc>,
    pub second: Vec<Vec<Arc>>,
    /// Assets whose requirements exceed the vehicles at the depot.
    pub removed: Vec<usize>,
}

impl ArcSets {
    /// `None` selects stage 1, `Some(c)` scenario `c`.
    pub fn context(&self, ctx: Option<usize>) -> &[Arc] {
        match ctx {
            None => &self.first,
            Some(c) => &self.second[c],
        }
    }

    pub fn outgoing(&self, ctx: Option<usize>, q: usize, i: usize) -> impl Iterator<Item = &Arc> {
        self.context(ctx)
            .iter()
            .filter(move |a| a.vtype == q && a.from == i)
    }

    pub fn incoming(&self, ctx: Option<usize>, q: usize, j: usize) -> impl Iterator<Item = &Arc> {
        self.context(ctx)
            .iter()
            .filter(move |a| a.vtype == q && a.to == j)
    }

    pub fn len(&self) -> usize {
        self.first.len() + self.second.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_removed(&self, node: usize) -> bool {
        self.removed.binary_search(&node).is_ok()
    }
}

/// Assets that can never be serviced because one requirement exceeds the vehicles stationed at the depot.
pub fn removed_assets(instance: &Instance) -> Vec<usize> {
    (1..=instance.n())
        .filter(|&j| {
            (0..instance.num_types())
                .any(|q| instance.requirement(j, q) > instance.fleet.depot_availability[q])
        })
        .collect()
}

/// Earliest time a vehicle can leave `i` in stage 1.
fn stage1_departure(instance: &Instance, i: usize) -> Option<f64> {
    if i == 0 {
        return Some(0.0);
    }
    instance
        .stage1_window(i)
        .map(|w| w.open + instance.service(i))
}

/// Earliest time a vehicle can leave `i` in scenario `c`, either as a staging node or after
/// a stage-2 service.
fn stage2_departure(instance: &Instance, c: usize, i: usize) -> Option<f64> {
    if i == 0 {
        return Some(0.0);
    }
    let a = instance.service(i);
    let staged = instance.stage1_window(i).map(|w| w.open + a);
    let serviced = instance
        .stage2_window(c, i)
        .map(|w| w.open.max(instance.staging_time() - a) + a);
    match (staged, serviced) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

pub fn preprocess(instance: &Instance) -> ArcSets {
    let n = instance.n();
    let sink = n + 1;
    let removed = removed_assets(instance);
    let alive = |j: usize| removed.binary_search(&j).is_err();
    let stage1: Vec<usize> = instance
        .stage1_assets()
        .into_iter()
        .filter(|&j| alive(j))
        .collect();

    let build = |origins: &[usize],
                 dests: &[usize],
                 close: &dyn Fn(usize) -> f64,
                 depart: &dyn Fn(usize) -> Option<f64>|
     -> Vec<Arc> {
        let mut arcs = Vec::new();
        for q in 0..instance.num_types() {
            if instance.fleet.depot_availability[q] == 0 {
                continue;
            }
            for &i in origins {
                if i != 0 && instance.requirement(i, q) == 0 {
                    continue;
                }
                let Some(dep) = depart(i) else { continue };
                for &j in dests {
                    if j == i || (i == 0 && j == sink) {
                        continue;
                    }
                    let keep = j == sink
                        || (instance.requirement(j, q) > 0
                            && dep + instance.t(q, i, j) <= close(j) + ARC_SLACK);
                    if keep {
                        arcs.push(Arc {
                            from: i,
                            to: j,
                            vtype: q,
                        });
                    }
                }
            }
        }
        arcs
    };

    let mut origins = vec![0];
    origins.extend(&stage1);
    let mut dests = stage1.clone();
    dests.push(sink);
    let first = build(
        &origins,
        &dests,
        &|j| instance.stage1_window(j).map_or(f64::NEG_INFINITY, |w| w.close),
        &|i| stage1_departure(instance, i),
    );

    let second = (0..instance.num_scenarios())
        .map(|c| {
            let at_risk: Vec<usize> = instance
                .scenario_assets(c)
                .into_iter()
                .filter(|&j| alive(j))
                .collect();
            let mut origins = vec![0];
            origins.extend(&stage1);
            origins.extend(&at_risk);
            origins.sort_unstable();
            origins.dedup();
            let mut dests = at_risk.clone();
            dests.push(sink);
            build(
                &origins,
                &dests,
                &|j| instance.stage2_window(c, j).map_or(f64::NEG_INFINITY, |w| w.close),
                &|i| stage2_departure(instance, c, i),
            )
        })
        .collect();

    ArcSets {
        first,
        second,
        removed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcVar {
    pub arc: Arc,
    pub x: VarId,
    pub z: VarId,
}

/// A built model together with the variables behind each decision.
#[derive(Debug, Clone)]
pub struct StochasticModel {
    pub model: MilpModel,
    pub arcs: ArcSets,
    pub staging_time: f64,
    /// Indexed by asset id - 1.
    pub y_f: Vec<VarId>,
    /// `[c][id - 1]`.
    pub y_s: Vec<Vec<VarId>>,
    pub s_f: Vec<VarId>,
    pub s_s: Vec<Vec<VarId>>,
    pub w: Vec<VarId>,
    pub x_f: Vec<ArcVar>,
    pub x_s: Vec<Vec<ArcVar>>,
    /// Shared-interval indicators `[c][id - 1]` of the multi-scenario model; empty otherwise.
    pub gamma: Vec<Vec<Option<VarId>>>,
}

impl StochasticModel {
    pub fn arc_vars(&self, ctx: Option<usize>) -> &[ArcVar] {
        match ctx {
            None => &self.x_f,
            Some(c) => &self.x_s[c],
        }
    }

    /// Service-start variable of `node` in a context; `None` for the depots.
    pub fn start_var(&self, ctx: Option<usize>, node: usize) -> Option<VarId> {
        if node == 0 || node > self.y_f.len() {
            return None;
        }
        Some(match ctx {
            None => self.s_f[node - 1],
            Some(c) => self.s_s[c][node - 1],
        })
    }
}

fn bounds(model: &MilpModel, v: VarId) -> (f64, f64) {
    let var = model.variable(v);
    (var.lower, var.upper)
}

fn start_bounds(h: &StochasticModel, ctx: Option<usize>, node: usize) -> (f64, f64) {
    match h.start_var(ctx, node) {
        Some(v) => bounds(&h.model, v),
        None => (0.0, 0.0),
    }
}

fn ctx_tag(ctx: Option<usize>) -> String {
    match ctx {
        None => "f".into(),
        Some(c) => format!("s{}", c + 1),
    }
}

/// Builds the two-stage model with preprocessing.
pub fn build(instance: &Instance) -> Result<StochasticModel> {
    let arcs = preprocess(instance);
    build_with_arcs(instance, arcs)
}

pub fn build_with_arcs(instance: &Instance, arcs: ArcSets) -> Result<StochasticModel> {
    instance.validate()?;
    let n = instance.n();
    let f = instance.num_scenarios();
    let sink = n + 1;
    let st = instance.staging_time();
    let t_max = instance.windows.horizon;
    let avail = &instance.fleet.depot_availability;
    if arcs.is_empty() {
        log::warn!("no feasible arcs; the model is trivial");
    }

    let mut m = MilpModel::new(if instance.meta.name.is_empty() {
        "two_stage".to_string()
    } else {
        instance.meta.name.clone()
    });
    m.config.t_max = Some(t_max);

    let mut y_f = Vec::with_capacity(n);
    let mut s_f = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 1..=n {
        let removed = arcs.is_removed(i);
        let win = instance.stage1_window(i);
        let y = m.add_binary(format!("Y_f[{i}]"))?;
        if removed || win.is_none() {
            m.set_upper(y, 0.0);
        }
        m.add_objective(y, instance.asset(i).value);
        y_f.push(y);
        let (lo, hi) = win.map_or((0.0, t_max), |w| (w.open, w.close));
        s_f.push(m.add_continuous(format!("S_f[{i}]"), lo, hi)?);
        let wv = m.add_binary(format!("w[{i}]"))?;
        if removed || win.is_none() {
            m.set_upper(wv, 0.0);
        }
        w.push(wv);
    }
    let mut y_s = Vec::with_capacity(f);
    let mut s_s = Vec::with_capacity(f);
    for c in 0..f {
        let p = instance.scenarios.probability(c);
        let mut ys = Vec::with_capacity(n);
        let mut ss = Vec::with_capacity(n);
        for i in 1..=n {
            let win = instance.stage2_window(c, i);
            let y = m.add_binary(format!("Y_s[{i},{}]", c + 1))?;
            if arcs.is_removed(i) || win.is_none() {
                m.set_upper(y, 0.0);
            }
            m.add_objective(y, p * instance.asset(i).value);
            ys.push(y);
            let (lo, hi) = win.map_or((0.0, t_max), |w| (w.open, w.close));
            ss.push(m.add_continuous(format!("S_s[{i},{}]", c + 1), lo, hi)?);
        }
        y_s.push(ys);
        s_s.push(ss);
    }

    let arc_vars = |m: &mut MilpModel, ctx: Option<usize>| -> Result<Vec<ArcVar>> {
        arcs.context(ctx)
            .iter()
            .map(|&arc| {
                let ub = if arc.to == sink {
                    avail[arc.vtype]
                } else {
                    avail[arc.vtype].min(instance.requirement(arc.to, arc.vtype))
                };
                let idx = match ctx {
                    None => format!("{},{},{}", arc.from, arc.to, arc.vtype + 1),
                    Some(c) => format!("{},{},{},{}", arc.from, arc.to, arc.vtype + 1, c + 1),
                };
                let tag = if ctx.is_none() { "f" } else { "s" };
                let x = m.add_integer(format!("X_{tag}[{idx}]"), 0.0, ub as f64)?;
                let z = m.add_binary(format!("z_{tag}[{idx}]"))?;
                Ok(ArcVar { arc, x, z })
            })
            .collect()
    };
    let x_f = arc_vars(&mut m, None)?;
    let x_s = (0..f)
        .map(|c| arc_vars(&mut m, Some(c)))
        .collect::<Result<Vec<_>>>()?;

    let mut h = StochasticModel {
        model: m,
        arcs,
        staging_time: st,
        y_f,
        y_s,
        s_f,
        s_s,
        w,
        x_f,
        x_s,
        gamma: Vec::new(),
    };
    add_rows(instance, &mut h);
    Ok(h)
}

fn add_rows(instance: &Instance, h: &mut StochasticModel) {
    use ConstraintSense::{Eq, Ge, Le};
    let n = instance.n();
    let nq = instance.num_types();
    let f = instance.num_scenarios();
    let sink = n + 1;
    let st = h.staging_time;
    let avail = instance.fleet.depot_availability.clone();
    let mut rows: Vec<(String, Vec<(VarId, f64)>, ConstraintSense, f64)> = Vec::new();
    let mut max_time_m: f64 = 0.0;

    // depot balance and departure cap, per type and scenario
    for q in 0..nq {
        for c in 0..f {
            let mut balance = Vec::new();
            let mut departures = Vec::new();
            for av in h.x_f.iter().chain(&h.x_s[c]) {
                if av.arc.vtype != q {
                    continue;
                }
                if av.arc.from == 0 {
                    balance.push((av.x, 1.0));
                    departures.push((av.x, 1.0));
                }
                if av.arc.to == sink {
                    balance.push((av.x, -1.0));
                }
            }
            let tag = format!("{},{}", q + 1, c + 1);
            if !balance.is_empty() {
                rows.push((format!("depot_balance[{tag}]"), balance, Eq, 0.0));
            }
            if !departures.is_empty() {
                rows.push((format!("depot_cap[{tag}]"), departures, Le, avail[q] as f64));
            }
        }
    }

    // flow conservation across stages
    for j in 1..=n {
        for q in 0..nq {
            for c in 0..f {
                let mut terms = Vec::new();
                for av in h.x_f.iter().chain(&h.x_s[c]) {
                    if av.arc.vtype != q {
                        continue;
                    }
                    if av.arc.to == j {
                        terms.push((av.x, 1.0));
                    }
                    if av.arc.from == j {
                        terms.push((av.x, -1.0));
                    }
                }
                if !terms.is_empty() {
                    rows.push((format!("flow[{j},{},{}]", q + 1, c + 1), terms, Eq, 0.0));
                }
            }
        }
    }

    // staging-node detection
    let big_staging: f64 = avail.iter().map(|&k| k as f64).sum();
    h.model.config.big_m.push(("staging".into(), big_staging));
    for j in 1..=n {
        if h.model.variable(h.w[j - 1]).upper == 0.0 {
            continue;
        }
        let mut d = Vec::new();
        for av in &h.x_f {
            if av.arc.from == j {
                d.push((av.x, 1.0));
            }
            if av.arc.to == j {
                d.push((av.x, -1.0));
            }
        }
        let mut lower = d.clone();
        lower.push((h.w[j - 1], big_staging));
        rows.push((format!("stage_lo[{j}]"), lower, Ge, 0.0));
        d.push((h.w[j - 1], 1.0));
        rows.push((format!("stage_hi[{j}]"), d, Le, 0.0));
    }

    // staging-time gating on arcs into assets
    for av in h.x_f.clone() {
        let j = av.arc.to;
        if j == sink {
            continue;
        }
        let sj = h.s_f[j - 1];
        let a = instance.service(j);
        let big = bounds(&h.model, sj).1 + a - st;
        if big > 0.0 {
            let name = format!("st_f[{},{},{}]", av.arc.from, j, av.arc.vtype + 1);
            rows.push((name, vec![(sj, 1.0), (av.z, big)], Le, st - a + big));
        }
    }
    for c in 0..f {
        for av in h.x_s[c].clone() {
            let j = av.arc.to;
            if j == sink {
                continue;
            }
            let sj = h.s_s[c][j - 1];
            let a = instance.service(j);
            let big = st - a - bounds(&h.model, sj).0;
            if big > 0.0 {
                let name = format!("st_s[{},{},{},{}]", av.arc.from, j, av.arc.vtype + 1, c + 1);
                rows.push((name, vec![(sj, 1.0), (av.z, -big)], Ge, st - a - big));
            }
        }
    }

    // synchronised requirements
    for j in 1..=n {
        for q in 0..nq {
            let r = instance.requirement(j, q) as f64;
            for ctx in std::iter::once(None).chain((0..f).map(Some)) {
                let y = match ctx {
                    None => h.y_f[j - 1],
                    Some(c) => h.y_s[c][j - 1],
                };
                let mut terms: Vec<(VarId, f64)> = h
                    .arc_vars(ctx)
                    .iter()
                    .filter(|av| av.arc.to == j && av.arc.vtype == q)
                    .map(|av| (av.x, 1.0))
                    .collect();
                if r > 0.0 && h.model.variable(y).upper > 0.0 {
                    terms.push((y, -r));
                }
                if !terms.is_empty() {
                    let name = format!("sync_{}[{j},{}]", ctx_tag(ctx), q + 1);
                    rows.push((name, terms, Eq, 0.0));
                }
            }
        }
    }

    // single service across stages
    for j in 1..=n {
        let yf = h.y_f[j - 1];
        if h.model.variable(yf).upper == 0.0 {
            continue;
        }
        for c in 0..f {
            let ys = h.y_s[c][j - 1];
            if h.model.variable(ys).upper > 0.0 {
                rows.push((format!("once[{j},{}]", c + 1), vec![(yf, 1.0), (ys, 1.0)], Le, 1.0));
            }
        }
    }

    // arc usage links
    for ctx in std::iter::once(None).chain((0..f).map(Some)) {
        for av in h.arc_vars(ctx).to_vec() {
            let ub = bounds(&h.model, av.x).1;
            let a = av.arc;
            let name = format!("link_{}[{},{},{}]", ctx_tag(ctx), a.from, a.to, a.vtype + 1);
            rows.push((name, vec![(av.x, 1.0), (av.z, -ub)], Le, 0.0));
        }
    }

    // time propagation along used arcs
    for ctx in std::iter::once(None).chain((0..f).map(Some)) {
        for av in h.arc_vars(ctx).to_vec() {
            let Arc { from: i, to: j, vtype: q } = av.arc;
            if j == sink {
                continue;
            }
            let travel = instance.t(q, i, j) + instance.service(i);
            let (_, hi_i) = start_bounds(h, ctx, i);
            let sj = h.start_var(ctx, j).expect("asset start variable");
            let (lo_j, _) = bounds(&h.model, sj);
            let big = hi_i + travel - lo_j;
            if big <= 0.0 {
                continue;
            }
            max_time_m = max_time_m.max(big);
            let mut terms = vec![(sj, -1.0), (av.z, big)];
            if let Some(si) = h.start_var(ctx, i) {
                terms.push((si, 1.0));
            }
            let name = format!("time_{}[{i},{j},{}]", ctx_tag(ctx), q + 1);
            rows.push((name, terms, Le, big - travel));
        }
    }
    h.model.config.big_m.push(("time".into(), max_time_m));

    // start-time handoff at staging nodes
    for i in 1..=n {
        let wv = h.w[i - 1];
        if h.model.variable(wv).upper == 0.0 {
            continue;
        }
        let sf = h.s_f[i - 1];
        let (lo_f, hi_f) = bounds(&h.model, sf);
        for c in 0..f {
            let ss = h.s_s[c][i - 1];
            let (lo_s, hi_s) = bounds(&h.model, ss);
            let big = hi_f - lo_s;
            if big > 0.0 {
                rows.push((
                    format!("handoff_hi[{i},{}]", c + 1),
                    vec![(sf, 1.0), (ss, -1.0), (wv, big)],
                    Le,
                    big,
                ));
            }
            let big = hi_s - lo_f;
            if big > 0.0 {
                rows.push((
                    format!("handoff_lo[{i},{}]", c + 1),
                    vec![(sf, 1.0), (ss, -1.0), (wv, -big)],
                    Ge,
                    -big,
                ));
            }
        }
    }

    for (name, terms, sense, rhs) in rows {
        h.model.add_constraint(name, terms, sense, rhs);
    }
}

fn rounded(solution: &Solution, v: VarId) -> i64 {
    solution.value(v).round() as i64
}

/// Strips one vehicle path from residual integer flows, starting at `start`.
/// Returns the visited assets and the node where the path stopped.
fn strip_path(
    residual: &mut HashMap<(usize, usize), i64>,
    arcs: &[Arc],
    q: usize,
    start: usize,
    sink: usize,
    start_of: &dyn Fn(usize) -> f64,
) -> (Vec<usize>, usize) {
    let mut cur = start;
    let mut visits = Vec::new();
    loop {
        let next = arcs
            .iter()
            .filter(|a| a.vtype == q && a.from == cur)
            .filter(|a| residual.get(&(a.from, a.to)).copied().unwrap_or(0) > 0)
            .min_by(|a, b| {
                let key = |j: usize| if j == sink { f64::INFINITY } else { start_of(j) };
                key(a.to).total_cmp(&key(b.to)).then(a.to.cmp(&b.to))
            })
            .map(|a| a.to);
        let Some(j) = next else { break };
        *residual.get_mut(&(cur, j)).expect("residual arc") -= 1;
        if j == sink {
            return (visits, sink);
        }
        visits.push(j);
        cur = j;
    }
    (visits, cur)
}

fn residual_flows(h: &StochasticModel, solution: &Solution, ctx: Option<usize>, q: usize) -> HashMap<(usize, usize), i64> {
    h.arc_vars(ctx)
        .iter()
        .filter(|av| av.arc.vtype == q)
        .map(|av| ((av.arc.from, av.arc.to), rounded(solution, av.x)))
        .filter(|&(_, x)| x > 0)
        .collect()
}

/// Decomposes the integer arc flows of `solution` into named vehicle routes.
pub fn extract_plan(h: &StochasticModel, solution: &Solution, instance: &Instance) -> Result<Plan> {
    if !solution.status.has_solution() {
        return Err(Error::Solver(format!(
            "no solution to extract (status {})",
            solution.status.as_str()
        )));
    }
    let n = instance.n();
    let sink = n + 1;
    let f = instance.num_scenarios();
    let mut plan = Plan::empty(instance);

    for q in 0..instance.num_types() {
        let mut residual = residual_flows(h, solution, None, q);
        let start_f = |j: usize| solution.value(h.s_f[j - 1]);
        for vp in plan.vehicles.iter_mut().filter(|v| v.vehicle.vtype == q) {
            let (visits, end) = strip_path(&mut residual, &h.arcs.first, q, 0, sink, &start_f);
            vp.stage1 = visits
                .iter()
                .map(|&j| Visit {
                    node: j,
                    start: start_f(j),
                })
                .collect();
            vp.staging_node = end;
        }
        if let Some((arc, x)) = residual.iter().find(|(_, &x)| x != 0) {
            return Err(Error::Internal(format!(
                "stage-1 flow of type {} not decomposable: arc {:?} keeps {x} units",
                q + 1,
                arc
            )));
        }

        for c in 0..f {
            let mut residual = residual_flows(h, solution, Some(c), q);
            let start_s = |j: usize| solution.value(h.s_s[c][j - 1]);
            for vp in plan.vehicles.iter_mut().filter(|v| v.vehicle.vtype == q) {
                if vp.staging_node == sink {
                    continue;
                }
                let (visits, _) = strip_path(
                    &mut residual,
                    &h.arcs.second[c],
                    q,
                    vp.staging_node,
                    sink,
                    &start_s,
                );
                vp.stage2[c] = visits
                    .iter()
                    .map(|&j| Visit {
                        node: j,
                        start: start_s(j),
                    })
                    .collect();
            }
            if let Some((arc, x)) = residual.iter().find(|(_, &x)| x != 0) {
                return Err(Error::Internal(format!(
                    "scenario {} flow of type {} not decomposable: arc {:?} keeps {x} units",
                    c + 1,
                    q + 1,
                    arc
                )));
            }
        }
    }

    plan.serviced_from_visits(f);
    let from_y: Vec<usize> = (1..=n)
        .filter(|&i| solution.value(h.y_f[i - 1]) > 0.5)
        .collect();
    if from_y != plan.stage1_serviced {
        return Err(Error::Internal(format!(
            "stage-1 routes visit {:?} but Y_f selects {:?}",
            plan.stage1_serviced, from_y
        )));
    }
    for c in 0..f {
        let from_y: Vec<usize> = (1..=n)
            .filter(|&i| solution.value(h.y_s[c][i - 1]) > 0.5)
            .collect();
        if from_y != plan.stage2_serviced[c] {
            return Err(Error::Internal(format!(
                "scenario {} routes visit {:?} but Y_s selects {:?}",
                c + 1,
                plan.stage2_serviced[c],
                from_y
            )));
        }
    }
    Ok(plan)
}

/// Writes `plan` as a variable assignment of `h`. Unvisited start times sit at their lower
/// bound. Fails when the plan uses an arc that preprocessing removed.
pub fn plan_to_assignment(h: &StochasticModel, instance: &Instance, plan: &Plan) -> Result<Vec<f64>> {
    let n = instance.n();
    let sink = n + 1;
    let f = instance.num_scenarios();
    let m = &h.model;
    let mut values: Vec<f64> = m.variables().iter().map(|v| v.lower.max(0.0).min(v.upper)).collect();
    let index = |ctx: Option<usize>| -> HashMap<Arc, &ArcVar> {
        h.arc_vars(ctx).iter().map(|av| (av.arc, av)).collect()
    };
    let add_flow = |values: &mut Vec<f64>, map: &HashMap<Arc, &ArcVar>, arc: Arc| -> Result<()> {
        let av = map.get(&arc).ok_or_else(|| {
            Error::Dimension(format!(
                "plan uses arc {} -> {} for type {} which is not in the model",
                arc.from,
                arc.to,
                arc.vtype + 1
            ))
        })?;
        values[av.x.0] += 1.0;
        values[av.z.0] = 1.0;
        Ok(())
    };

    let first = index(None);
    for vp in &plan.vehicles {
        let q = vp.vehicle.vtype;
        let mut prev = 0;
        for v in &vp.stage1 {
            add_flow(&mut values, &first, Arc { from: prev, to: v.node, vtype: q })?;
            values[h.s_f[v.node - 1].0] = v.start;
            prev = v.node;
        }
        if vp.staging_node == sink && prev != 0 {
            add_flow(&mut values, &first, Arc { from: prev, to: sink, vtype: q })?;
        } else if vp.staging_node != sink && vp.staging_node != prev {
            return Err(Error::Dimension(format!(
                "vehicle {:?} stages at {} but its stage-1 route ends at {prev}",
                vp.vehicle, vp.staging_node
            )));
        }
        if prev != 0 && vp.staging_node == prev {
            values[h.w[prev - 1].0] = 1.0;
        }
    }
    for c in 0..f {
        let map = index(Some(c));
        for vp in &plan.vehicles {
            if vp.staging_node == sink {
                continue;
            }
            let q = vp.vehicle.vtype;
            let route = &vp.stage2[c];
            if vp.staging_node == 0 && route.is_empty() {
                continue;
            }
            let mut prev = vp.staging_node;
            for v in route {
                add_flow(&mut values, &map, Arc { from: prev, to: v.node, vtype: q })?;
                values[h.s_s[c][v.node - 1].0] = v.start;
                prev = v.node;
            }
            add_flow(&mut values, &map, Arc { from: prev, to: sink, vtype: q })?;
        }
    }
    for i in 1..=n {
        if values[h.w[i - 1].0] > 0.5 {
            for c in 0..f {
                values[h.s_s[c][i - 1].0] = values[h.s_f[i - 1].0];
            }
        }
    }
    for &i in &plan.stage1_serviced {
        values[h.y_f[i - 1].0] = 1.0;
    }
    for (c, list) in plan.stage2_serviced.iter().enumerate() {
        for &i in list {
            values[h.y_s[c][i - 1].0] = 1.0;
        }
    }
    Ok(values)
}
