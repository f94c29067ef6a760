//! Plan feasibility checks and an exhaustive optimum for micro-instances.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::plan::{Plan, VehicleId, VehiclePlan, Visit};

pub const TIME_TOL: f64 = 1e-6;

pub const ORACLE_MAX_ASSETS: usize = 7;
pub const ORACLE_MAX_VEHICLES: u32 = 3;
pub const ORACLE_MAX_SCENARIOS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    Window,
    Sync,
    Capacity,
    StagingTime,
    DoubleService,
    Flow,
    TravelTime,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::Window => "WINDOW",
            ViolationCode::Sync => "SYNC",
            ViolationCode::Capacity => "CAPACITY",
            ViolationCode::StagingTime => "STAGING_TIME",
            ViolationCode::DoubleService => "DOUBLE_SERVICE",
            ViolationCode::Flow => "FLOW",
            ViolationCode::TravelTime => "TRAVEL_TIME",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: String,
    pub detail: String,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} (by {:.6})",
            self.code, self.location, self.detail, self.magnitude
        )
    }
}

fn context_name(ctx: Option<usize>) -> String {
    match ctx {
        None => "stage 1".into(),
        Some(c) => format!("scenario {}", c + 1),
    }
}

fn vehicle_name(v: VehicleId) -> String {
    format!("vehicle {}.{}", v.vtype + 1, v.index + 1)
}

struct Checker<'a> {
    instance: &'a Instance,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn report(&mut self, code: ViolationCode, location: String, detail: String, magnitude: f64) {
        if magnitude > TIME_TOL {
            self.out.push(Violation {
                code,
                location,
                detail,
                magnitude,
            });
        }
    }

    /// Walks one route and checks windows, travel and the staging-time side.
    fn route(&mut self, vp: &VehiclePlan, ctx: Option<usize>, route: &[Visit], start: usize, ready: f64) {
        let inst = self.instance;
        let st = inst.staging_time();
        let who = format!("{} {}", vehicle_name(vp.vehicle), context_name(ctx));
        let q = vp.vehicle.vtype;
        let (mut prev, mut free) = (start, ready);
        for v in route {
            let j = v.node;
            let window = match ctx {
                None => inst.stage1_window(j),
                Some(c) => inst.stage2_window(c, j),
            };
            match window {
                None => self.report(
                    ViolationCode::Window,
                    format!("{who} asset {j}"),
                    "asset has no window in this context".into(),
                    1.0,
                ),
                Some(w) => {
                    let by = (w.open - v.start).max(v.start - w.close);
                    self.report(
                        ViolationCode::Window,
                        format!("{who} asset {j}"),
                        format!("start {:.6} outside [{:.6}, {:.6}]", v.start, w.open, w.close),
                        by,
                    );
                }
            }
            let arrive = free + inst.t(q, prev, j);
            self.report(
                ViolationCode::TravelTime,
                format!("{who} leg {prev}->{j}"),
                format!("earliest arrival {arrive:.6} after service start {:.6}", v.start),
                arrive - v.start,
            );
            let end = v.start + inst.service(j);
            match ctx {
                None => self.report(
                    ViolationCode::StagingTime,
                    format!("{who} asset {j}"),
                    format!("stage-1 service ends at {end:.6}, after the staging time {st:.6}"),
                    end - st,
                ),
                Some(_) => self.report(
                    ViolationCode::StagingTime,
                    format!("{who} asset {j}"),
                    format!("stage-2 service ends at {end:.6}, before the staging time {st:.6}"),
                    st - end,
                ),
            }
            prev = j;
            free = end;
        }
    }

    /// Requirement counts, identical starts and serviced flags in one context.
    fn sync(&mut self, plan: &Plan, ctx: Option<usize>) {
        let inst = self.instance;
        let mut visits: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        for vp in &plan.vehicles {
            let route = match ctx {
                None => &vp.stage1,
                Some(c) => &vp.stage2[c],
            };
            for v in route {
                visits
                    .entry(v.node)
                    .or_default()
                    .push((vp.vehicle.vtype, v.start));
            }
        }
        let flagged: &[usize] = match ctx {
            None => &plan.stage1_serviced,
            Some(c) => &plan.stage2_serviced[c],
        };
        let mut nodes: Vec<usize> = visits.keys().copied().chain(flagged.iter().copied()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        for j in nodes {
            let here = visits.get(&j).map(Vec::as_slice).unwrap_or(&[]);
            let loc = format!("{} asset {j}", context_name(ctx));
            if !flagged.contains(&j) {
                self.report(
                    ViolationCode::Sync,
                    loc.clone(),
                    "visited but not flagged as serviced".into(),
                    here.len() as f64,
                );
            }
            for q in 0..inst.num_types() {
                let got = here.iter().filter(|(t, _)| *t == q).count() as f64;
                let need = inst.requirement(j, q) as f64;
                self.report(
                    ViolationCode::Sync,
                    loc.clone(),
                    format!("{got} vehicles of type {} but {need} required", q + 1),
                    (got - need).abs(),
                );
            }
            if let Some(&(_, s0)) = here.first() {
                let spread = here.iter().map(|&(_, s)| (s - s0).abs()).fold(0.0, f64::max);
                self.report(
                    ViolationCode::Sync,
                    loc,
                    "vehicles start service at different times".into(),
                    spread,
                );
            }
        }
    }
}

/// Checks every routing, timing and synchronisation rule of the two-stage model.
pub fn check(instance: &Instance, plan: &Plan) -> Result<Vec<Violation>> {
    let n = instance.n();
    let nq = instance.num_types();
    let f = instance.num_scenarios();
    let sink = n + 1;
    if plan.stage2_serviced.len() != f {
        return Err(Error::Dimension(format!(
            "plan has {} scenario lists, instance has {f}",
            plan.stage2_serviced.len()
        )));
    }
    for vp in &plan.vehicles {
        if vp.vehicle.vtype >= nq {
            return Err(Error::Dimension(format!("vehicle type {} does not exist", vp.vehicle.vtype + 1)));
        }
        if vp.stage2.len() != f {
            return Err(Error::Dimension(format!(
                "{} has {} scenario routes, instance has {f}",
                vehicle_name(vp.vehicle),
                vp.stage2.len()
            )));
        }
        let nodes = vp.stage1.iter().chain(vp.stage2.iter().flatten());
        for v in nodes {
            if v.node == 0 || v.node > n {
                return Err(Error::Dimension(format!("route visits node {} which is not an asset", v.node)));
            }
        }
        if vp.staging_node > sink {
            return Err(Error::Dimension(format!("staging node {} does not exist", vp.staging_node)));
        }
    }
    for &i in plan.stage1_serviced.iter().chain(plan.stage2_serviced.iter().flatten()) {
        if i == 0 || i > n {
            return Err(Error::Dimension(format!("serviced asset {i} does not exist")));
        }
    }

    let mut ck = Checker {
        instance,
        out: Vec::new(),
    };

    let mut seen: HashMap<VehicleId, usize> = HashMap::new();
    for vp in &plan.vehicles {
        *seen.entry(vp.vehicle).or_default() += 1;
    }
    for (id, count) in &seen {
        ck.report(
            ViolationCode::Capacity,
            vehicle_name(*id),
            "vehicle listed more than once".into(),
            (*count - 1) as f64,
        );
    }
    for q in 0..nq {
        let used = plan.vehicles.iter().filter(|v| v.vehicle.vtype == q).count() as f64;
        let avail = instance.fleet.depot_availability[q] as f64;
        ck.report(
            ViolationCode::Capacity,
            format!("type {}", q + 1),
            format!("{used} vehicles used, {avail} stationed at the depot"),
            used - avail,
        );
    }

    for vp in &plan.vehicles {
        let who = vehicle_name(vp.vehicle);
        ck.route(vp, None, &vp.stage1, 0, 0.0);
        let last = vp.stage1.last();
        let expected = last.map_or(0, |v| v.node);
        if vp.staging_node != expected && vp.staging_node != sink {
            ck.report(
                ViolationCode::Flow,
                who.clone(),
                format!("staging node {} but stage-1 route ends at {expected}", vp.staging_node),
                1.0,
            );
        }
        for c in 0..f {
            if vp.staging_node == sink {
                if !vp.stage2[c].is_empty() {
                    ck.report(
                        ViolationCode::Flow,
                        format!("{who} {}", context_name(Some(c))),
                        "vehicle returned to the end depot in stage 1 but has a stage-2 route".into(),
                        vp.stage2[c].len() as f64,
                    );
                }
                continue;
            }
            let ready = last.map_or(0.0, |v| v.start + instance.service(v.node));
            ck.route(vp, Some(c), &vp.stage2[c], vp.staging_node, ready);
        }
        let mut nodes: Vec<usize> = vp.stage1.iter().map(|v| v.node).collect();
        nodes.sort_unstable();
        for w in nodes.windows(2) {
            if w[0] == w[1] {
                ck.report(
                    ViolationCode::DoubleService,
                    format!("{who} stage 1 asset {}", w[0]),
                    "vehicle visits the asset twice".into(),
                    1.0,
                );
            }
        }
        for c in 0..f {
            let mut all = nodes.clone();
            all.extend(vp.stage2[c].iter().map(|v| v.node));
            all.sort_unstable();
            for w in all.windows(2) {
                if w[0] == w[1] {
                    ck.report(
                        ViolationCode::DoubleService,
                        format!("{who} {} asset {}", context_name(Some(c)), w[0]),
                        "vehicle visits the asset twice across stages".into(),
                        1.0,
                    );
                }
            }
        }
    }

    for c in 0..f {
        for &i in &plan.stage2_serviced[c] {
            if plan.stage1_serviced.contains(&i) {
                ck.report(
                    ViolationCode::DoubleService,
                    format!("asset {i}"),
                    format!("serviced in stage 1 and in scenario {}", c + 1),
                    1.0,
                );
            }
        }
    }

    ck.sync(plan, None);
    for c in 0..f {
        ck.sync(plan, Some(c));
    }
    Ok(ck.out)
}

/// Result of the exhaustive search: the optimum and one plan attaining it.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub plan: Plan,
}

pub fn brute_force_optimum(instance: &Instance) -> Result<f64> {
    brute_force(instance).map(|r| r.value)
}

/// One vehicle's position when a context begins.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Origin {
    node: usize,
    ready: f64,
}

#[derive(Debug, Clone, Default)]
struct Schedule {
    routes: Vec<Vec<usize>>,
    start: HashMap<usize, f64>,
    value: f64,
}

struct Context<'a> {
    instance: &'a Instance,
    vtypes: &'a [usize],
    origins: &'a [Origin],
    candidates: Vec<usize>,
    open: HashMap<usize, f64>,
    close: HashMap<usize, f64>,
}

impl Context<'_> {
    /// Earliest synchronised start times for fixed routes; `None` if some window is missed
    /// or the routes wait on each other in a cycle.
    fn schedule(&self, routes: &[Vec<usize>]) -> Option<HashMap<usize, f64>> {
        let inst = self.instance;
        let mut start: HashMap<usize, f64> = HashMap::new();
        let total: usize = {
            let mut all: Vec<usize> = routes.iter().flatten().copied().collect();
            all.sort_unstable();
            all.dedup();
            all.len()
        };
        let mut pos = vec![0usize; routes.len()];
        while start.len() < total {
            let mut progressed = false;
            for v in 0..routes.len() {
                let Some(&j) = routes[v].get(pos[v]) else { continue };
                if start.contains_key(&j) {
                    continue;
                }
                // j can be scheduled once it is the next stop of every vehicle serving it
                let ready = routes.iter().enumerate().all(|(u, r)| {
                    !r.contains(&j) || r.get(pos[u]) == Some(&j)
                });
                if !ready {
                    continue;
                }
                let mut s = self.open[&j];
                for (u, r) in routes.iter().enumerate() {
                    if r.get(pos[u]) != Some(&j) {
                        continue;
                    }
                    let (prev, free) = if pos[u] == 0 {
                        (self.origins[u].node, self.origins[u].ready)
                    } else {
                        let p = r[pos[u] - 1];
                        (p, start[&p] + inst.service(p))
                    };
                    s = s.max(free + inst.t(self.vtypes[u], prev, j));
                }
                if s > self.close[&j] + 1e-9 {
                    return None;
                }
                start.insert(j, s);
                for (u, r) in routes.iter().enumerate() {
                    if r.get(pos[u]) == Some(&j) {
                        pos[u] += 1;
                    }
                }
                progressed = true;
            }
            if !progressed {
                return None;
            }
        }
        Some(start)
    }

    /// Calls `visit` for every feasible schedule servicing exactly the assets in `subset`
    /// until it returns `true`.
    fn search_subset(&self, subset: &[usize], visit: &mut dyn FnMut(Schedule) -> bool) -> bool {
        let mut lists = vec![Vec::new(); self.vtypes.len()];
        self.assign(subset, 0, &mut lists, visit)
    }

    fn assign(
        &self,
        subset: &[usize],
        k: usize,
        lists: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(Schedule) -> bool,
    ) -> bool {
        if k == subset.len() {
            let mut routes = vec![Vec::new(); lists.len()];
            return self.order(0, lists, &mut routes, visit);
        }
        let j = subset[k];
        let picks: Vec<Vec<Vec<usize>>> = (0..self.instance.num_types())
            .map(|q| {
                let pool: Vec<usize> = (0..self.vtypes.len()).filter(|&v| self.vtypes[v] == q).collect();
                combinations(&pool, self.instance.requirement(j, q) as usize)
            })
            .collect();
        let mut choice = vec![0usize; picks.len()];
        if picks.iter().any(Vec::is_empty) {
            return false;
        }
        loop {
            let chosen: Vec<usize> = choice
                .iter()
                .enumerate()
                .flat_map(|(q, &idx)| picks[q][idx].iter().copied())
                .collect();
            for &v in &chosen {
                lists[v].push(j);
            }
            let stop = self.assign(subset, k + 1, lists, visit);
            for &v in &chosen {
                lists[v].pop();
            }
            if stop {
                return true;
            }
            let mut q = 0;
            loop {
                if q == choice.len() {
                    return false;
                }
                choice[q] += 1;
                if choice[q] < picks[q].len() {
                    break;
                }
                choice[q] = 0;
                q += 1;
            }
        }
    }

    fn order(
        &self,
        v: usize,
        lists: &[Vec<usize>],
        routes: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(Schedule) -> bool,
    ) -> bool {
        if v == lists.len() {
            let Some(start) = self.schedule(routes) else { return false };
            let value = start.keys().map(|&j| self.instance.asset(j).value).sum();
            return visit(Schedule {
                routes: routes.clone(),
                start,
                value,
            });
        }
        let mut rest = lists[v].clone();
        rest.sort_unstable();
        routes[v].clear();
        let o = self.origins[v];
        let stop = self.extend(v, o.node, o.ready, &mut rest, lists, routes, visit);
        routes[v].clear();
        stop
    }

    /// Orders the remaining stops of vehicle `v`. Waiting for partners only delays a
    /// vehicle, so a prefix that misses a window on its own is abandoned.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        v: usize,
        at: usize,
        free: f64,
        rest: &mut Vec<usize>,
        lists: &[Vec<usize>],
        routes: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(Schedule) -> bool,
    ) -> bool {
        if rest.is_empty() {
            return self.order(v + 1, lists, routes, visit);
        }
        for k in 0..rest.len() {
            let j = rest[k];
            let s = self.open[&j].max(free + self.instance.t(self.vtypes[v], at, j));
            if s > self.close[&j] + 1e-9 {
                continue;
            }
            rest.remove(k);
            routes[v].push(j);
            let stop = self.extend(v, j, s + self.instance.service(j), rest, lists, routes, visit);
            routes[v].pop();
            rest.insert(k, j);
            if stop {
                return true;
            }
        }
        false
    }

    fn subsets(&self) -> Vec<(f64, Vec<usize>)> {
        let k = self.candidates.len();
        let mut out: Vec<(f64, Vec<usize>)> = (0u32..1 << k)
            .map(|mask| {
                let s: Vec<usize> = (0..k)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| self.candidates[b])
                    .collect();
                (s.iter().map(|&j| self.instance.asset(j).value).sum(), s)
            })
            .collect();
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        out
    }

    /// Best schedule over all subsets; subsets are tried in decreasing value.
    fn best(&self) -> Schedule {
        let mut best = Schedule {
            routes: vec![Vec::new(); self.vtypes.len()],
            ..Schedule::default()
        };
        for (value, subset) in self.subsets() {
            if value <= best.value {
                break;
            }
            let mut found = None;
            self.search_subset(&subset, &mut |s| {
                found = Some(s);
                true
            });
            if let Some(s) = found {
                best = s;
            }
        }
        best
    }
}

fn combinations(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in combinations(&pool[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive optimum of the two-stage model over subsets, vehicle assignments and visit
/// orders, with earliest-start scheduling. Scenarios are independent given stage 1.
pub fn brute_force(instance: &Instance) -> Result<OracleResult> {
    instance.validate()?;
    let n = instance.n();
    let f = instance.num_scenarios();
    let total = instance.fleet.depot_availability.iter().sum::<u32>();
    if n > ORACLE_MAX_ASSETS || total > ORACLE_MAX_VEHICLES || f > ORACLE_MAX_SCENARIOS {
        return Err(Error::TooLarge(format!(
            "{n} assets, {total} vehicles, {f} scenarios (limits {ORACLE_MAX_ASSETS}, {ORACLE_MAX_VEHICLES}, {ORACLE_MAX_SCENARIOS})"
        )));
    }
    for i in 1..=n {
        if instance.stage1_window(i).is_some() && (0..f).any(|c| instance.stage2_window(c, i).is_some()) {
            return Err(Error::TooLarge(format!(
                "asset {i} has both a stage-1 and a stage-2 window"
            )));
        }
    }
    let st = instance.staging_time();
    let empty = Plan::empty(instance);
    let ids: Vec<VehicleId> = empty.vehicles.iter().map(|v| v.vehicle).collect();
    let vtypes: Vec<usize> = ids.iter().map(|v| v.vtype).collect();
    let servable = |j: usize| {
        (0..instance.num_types()).all(|q| instance.requirement(j, q) <= instance.fleet.depot_availability[q])
    };

    let depot: Vec<Origin> = vec![Origin { node: 0, ready: 0.0 }; vtypes.len()];
    let mut stage1 = Context {
        instance,
        vtypes: &vtypes,
        origins: &depot,
        candidates: Vec::new(),
        open: HashMap::new(),
        close: HashMap::new(),
    };
    for j in instance.stage1_assets() {
        if servable(j) {
            let w = instance.stage1_window(j).expect("stage-1 window");
            stage1.candidates.push(j);
            stage1.open.insert(j, w.open);
            stage1.close.insert(j, w.close);
        }
    }

    let scenario_windows: Vec<(Vec<usize>, HashMap<usize, f64>, HashMap<usize, f64>)> = (0..f)
        .map(|c| {
            let mut cands = Vec::new();
            let mut open = HashMap::new();
            let mut close = HashMap::new();
            for j in instance.scenario_assets(c) {
                if servable(j) {
                    let w = instance.stage2_window(c, j).expect("window");
                    cands.push(j);
                    open.insert(j, w.open.max(st - instance.service(j)));
                    close.insert(j, w.close);
                }
            }
            (cands, open, close)
        })
        .collect();

    let mut memo: Vec<HashMap<Vec<(usize, u64)>, Schedule>> = vec![HashMap::new(); f];
    let mut best: Option<(f64, Schedule, Vec<Schedule>)> = None;
    let subsets = stage1.subsets();
    for (_, subset) in &subsets {
        stage1.search_subset(subset, &mut |s1| {
            let origins: Vec<Origin> = s1
                .routes
                .iter()
                .map(|r| match r.last() {
                    Some(&j) => Origin {
                        node: j,
                        ready: s1.start[&j] + instance.service(j),
                    },
                    None => Origin { node: 0, ready: 0.0 },
                })
                .collect();
            let key: Vec<(usize, u64)> = origins.iter().map(|o| (o.node, o.ready.to_bits())).collect();
            let mut total = s1.value;
            let mut seconds = Vec::with_capacity(f);
            for c in 0..f {
                let s2 = memo[c]
                    .entry(key.clone())
                    .or_insert_with(|| {
                        let (cands, open, close) = &scenario_windows[c];
                        Context {
                            instance,
                            vtypes: &vtypes,
                            origins: &origins,
                            candidates: cands.clone(),
                            open: open.clone(),
                            close: close.clone(),
                        }
                        .best()
                    })
                    .clone();
                total += instance.scenarios.probability(c) * s2.value;
                seconds.push(s2);
            }
            if best.as_ref().map_or(true, |b| total > b.0 + 1e-12) {
                best = Some((total, s1, seconds));
            }
            false
        });
    }

    let (value, s1, s2) = best.expect("the empty plan is always feasible");
    let mut plan = empty;
    for (v, vp) in plan.vehicles.iter_mut().enumerate() {
        vp.stage1 = s1.routes[v]
            .iter()
            .map(|&j| Visit { node: j, start: s1.start[&j] })
            .collect();
        vp.staging_node = s1.routes[v].last().copied().unwrap_or(0);
        for c in 0..f {
            vp.stage2[c] = s2[c].routes[v]
                .iter()
                .map(|&j| Visit { node: j, start: s2[c].start[&j] })
                .collect();
        }
    }
    plan.serviced_from_visits(f);
    Ok(OracleResult { value, plan })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_listed_in_order() {
        assert_eq!(combinations(&[0, 1, 2], 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(&[0], 2), Vec::<Vec<usize>>::new());
    }
}
