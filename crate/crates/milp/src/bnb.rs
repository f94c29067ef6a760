//! Exact solve: LP-based branch and bound, or HiGHS' own MIP solver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::MilpError;
use crate::model::MilpModel;
use crate::relax::{HighsBackend, LpOutcome};
use crate::solution::{Solution, SolveStats, SolveStatus};

pub const INTEGRALITY_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-6;
const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Own branch and bound over HiGHS LP relaxations.
    #[default]
    BranchAndBound,
    /// HiGHS MIP solver, single threaded.
    Highs,
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bnb" | "branch-and-bound" => Ok(Engine::BranchAndBound),
            "highs" => Ok(Engine::Highs),
            other => Err(format!("unknown engine `{other}` (expected bnb or highs)")),
        }
    }
}

/// Which fractional column a node branches on. Both pick the most fractional candidate,
/// ties going to the lowest label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Columns with a non-zero objective coefficient are candidates first; the rest only
    /// once those are integral.
    #[default]
    ObjectiveFirst,
    /// Every integral column competes.
    MostFractional,
}

impl std::str::FromStr for BranchRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "objective-first" => Ok(BranchRule::ObjectiveFirst),
            "most-fractional" => Ok(BranchRule::MostFractional),
            other => Err(format!(
                "unknown branching rule `{other}` (expected objective-first or most-fractional)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub engine: Engine,
    pub branching: BranchRule,
    /// Feasible point used as the first incumbent. Ignored if it violates the model.
    pub initial_solution: Option<Vec<f64>>,
}

impl SolveLimits {
    pub fn with_time_limit(seconds: f64) -> Self {
        Self {
            time_limit: Some(Duration::from_secs_f64(seconds)),
            ..Self::default()
        }
    }
}

/// Solves `model` to optimality or until a limit is hit.
pub fn solve_exact(model: &MilpModel, limits: &SolveLimits) -> Result<Solution, MilpError> {
    model.validate()?;
    match limits.engine {
        Engine::BranchAndBound => BranchAndBound::new(model, limits).run(),
        Engine::Highs => solve_with_highs(model, limits),
    }
}

#[derive(Debug)]
struct Node {
    bound: f64,
    id: u64,
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct BranchAndBound<'a> {
    model: &'a MilpModel,
    limits: &'a SolveLimits,
    start: Instant,
    root_bounds: Vec<(f64, f64)>,
    /// Integral columns sorted by label, so ties go to the lowest label.
    branch_order: Vec<usize>,
    /// Candidates considered before `branch_order`; empty for plain most-fractional.
    priority: Vec<usize>,
    /// Every integral point's objective lies on this grid (0 when unknown).
    step: f64,
    incumbent: Option<(f64, Vec<f64>)>,
    stats: SolveStats,
    next_id: u64,
}

enum NodeResult {
    Pruned,
    Branch(Node, Node),
}

impl<'a> BranchAndBound<'a> {
    fn new(model: &'a MilpModel, limits: &'a SolveLimits) -> Self {
        let root_bounds = model
            .variables()
            .iter()
            .map(|v| {
                if v.kind.is_integral() {
                    ((v.lower - 1e-9).ceil(), (v.upper + 1e-9).floor())
                } else {
                    (v.lower, v.upper)
                }
            })
            .collect();
        let mut branch_order: Vec<usize> = (0..model.num_vars())
            .filter(|&j| model.variables()[j].kind.is_integral())
            .collect();
        branch_order.sort_by(|&a, &b| model.variables()[a].label.cmp(&model.variables()[b].label));
        let priority = match limits.branching {
            BranchRule::ObjectiveFirst => branch_order
                .iter()
                .copied()
                .filter(|&j| model.objective()[j] != 0.0)
                .collect(),
            BranchRule::MostFractional => Vec::new(),
        };
        let step = objective_step(model);
        if step > 0.0 {
            log::debug!("objective values lie on a grid of {step}");
        }
        Self {
            model,
            limits,
            start: Instant::now(),
            root_bounds,
            branch_order,
            priority,
            step,
            incumbent: None,
            stats: SolveStats::default(),
            next_id: 0,
        }
    }

    fn remaining(&self) -> Option<f64> {
        self.limits
            .time_limit
            .map(|t| (t.as_secs_f64() - self.start.elapsed().as_secs_f64()).max(0.0))
    }

    fn out_of_budget(&self) -> bool {
        if self.remaining().is_some_and(|r| r <= 0.0) {
            return true;
        }
        self.limits
            .node_limit
            .is_some_and(|n| self.stats.nodes >= n)
    }

    fn incumbent_value(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |(v, _)| *v)
    }

    /// A node whose bound does not exceed this cannot hold a better integral point.
    fn cutoff(&self) -> f64 {
        let inc = self.incumbent_value();
        if self.step > 0.0 && inc.is_finite() {
            inc + self.step - PRUNE_TOL.max(1e-6 * self.step)
        } else {
            inc + PRUNE_TOL
        }
    }

    fn offer(&mut self, values: Vec<f64>) {
        let obj = self.model.objective_value(&values);
        if obj > self.incumbent_value() + 1e-9 {
            log::debug!("incumbent {obj:.6} at node {}", self.stats.nodes);
            self.stats.incumbent_trace.push((self.stats.nodes, obj));
            self.incumbent = Some((obj, values));
        }
    }

    fn run(mut self) -> Result<Solution, MilpError> {
        if self.root_bounds.iter().any(|&(lo, hi)| lo > hi) {
            return Ok(self.finish_infeasible());
        }
        if self.model.num_vars() == 0 {
            let feasible = self.model.max_violation(&[]) <= FEASIBILITY_TOL;
            self.stats.seconds = self.start.elapsed().as_secs_f64();
            return Ok(if feasible {
                let obj = self.model.objective_constant;
                Solution {
                    status: SolveStatus::Optimal,
                    values: Vec::new(),
                    objective: obj,
                    bound: obj,
                    stats: self.stats,
                }
            } else {
                Solution::infeasible(self.stats)
            });
        }
        if let Some(start) = &self.limits.initial_solution {
            if start.len() == self.model.num_vars()
                && self.model.max_violation(start) <= FEASIBILITY_TOL
            {
                let mut start = start.clone();
                for &j in &self.branch_order {
                    start[j] = start[j].round();
                }
                self.offer(start);
            } else {
                log::warn!("initial solution rejected: infeasible or wrong length");
            }
        }

        let mut lp = HighsBackend::new(self.model, false);
        for (j, &(lo, hi)) in self.root_bounds.iter().enumerate() {
            lp.set_bounds(j, lo, hi);
        }
        let mut open: BinaryHeap<Node> = BinaryHeap::new();
        let mut current = Some(Node {
            bound: f64::INFINITY,
            id: self.take_id(),
            changes: Vec::new(),
        });
        let mut stopped = false;
        let mut stopped_bound = f64::NEG_INFINITY;

        loop {
            let node = match current.take().or_else(|| open.pop()) {
                Some(n) => n,
                None => break,
            };
            if node.bound <= self.cutoff() {
                continue;
            }
            if self.out_of_budget() {
                stopped = true;
                stopped_bound = stopped_bound.max(node.bound);
                break;
            }
            let is_root = node.id == 0;
            match self.process(&mut lp, node, is_root)? {
                Ok(NodeResult::Pruned) => {}
                Ok(NodeResult::Branch(up, down)) => {
                    open.push(down);
                    current = Some(up);
                }
                Err(bound) => {
                    stopped = true;
                    stopped_bound = stopped_bound.max(bound);
                    break;
                }
            }
        }
        self.stats.lp_iterations = lp.iterations;
        self.stats.seconds = self.start.elapsed().as_secs_f64();

        let open_bound = current
            .iter()
            .chain(open.iter())
            .map(|n| n.bound)
            .fold(stopped_bound, f64::max);
        let inc = self.incumbent_value();
        let stats = std::mem::take(&mut self.stats);
        Ok(match self.incumbent.take() {
            None if !stopped => Solution::infeasible(stats),
            None => Solution {
                status: SolveStatus::TimeLimit,
                values: Vec::new(),
                objective: f64::NAN,
                bound: open_bound,
                stats,
            },
            Some((obj, values)) => {
                let bound = if stopped { open_bound.max(inc) } else { inc };
                let status = if bound <= inc + PRUNE_TOL {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Feasible {
                        gap: relative_gap(inc, bound),
                    }
                };
                Solution {
                    status,
                    values,
                    objective: obj,
                    bound,
                    stats,
                }
            }
        })
    }

    fn take_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn finish_infeasible(mut self) -> Solution {
        self.stats.seconds = self.start.elapsed().as_secs_f64();
        Solution::infeasible(self.stats)
    }

    /// Solves one node. `Err(bound)` means the LP hit the time limit.
    fn process(
        &mut self,
        lp: &mut HighsBackend,
        node: Node,
        is_root: bool,
    ) -> Result<Result<NodeResult, f64>, MilpError> {
        self.stats.nodes += 1;
        let mut target = self.root_bounds.clone();
        for &(j, lo, hi) in &node.changes {
            target[j] = (lo, hi);
        }
        for (j, &(lo, hi)) in target.iter().enumerate() {
            lp.set_bounds(j, lo, hi);
        }
        if let Some(r) = self.remaining() {
            lp.set_time_limit(r);
        }
        let (objective, values) = match lp.solve()?.outcome {
            LpOutcome::Optimal { objective, values } => (objective, values),
            LpOutcome::Infeasible => return Ok(Ok(NodeResult::Pruned)),
            LpOutcome::Unbounded if is_root => return Err(MilpError::Unbounded),
            LpOutcome::Unbounded => return Ok(Ok(NodeResult::Pruned)),
            LpOutcome::Stopped { .. } => return Ok(Err(node.bound)),
        };
        if objective <= self.cutoff() {
            return Ok(Ok(NodeResult::Pruned));
        }

        let most_fractional = |cols: &[usize]| {
            let mut pick: Option<(usize, f64)> = None;
            for &j in cols {
                let x = values[j];
                let frac = x - x.floor();
                let score = frac.min(1.0 - frac);
                if score > INTEGRALITY_TOL && pick.is_none_or(|(_, best)| score > best + 1e-9) {
                    pick = Some((j, score));
                }
            }
            pick
        };
        let pick = most_fractional(&self.priority).or_else(|| most_fractional(&self.branch_order));
        let Some((j, _)) = pick else {
            let mut values = values;
            for &k in &self.branch_order {
                values[k] = values[k].round();
            }
            self.offer(values);
            return Ok(Ok(NodeResult::Pruned));
        };

        let x = values[j];
        let (lo, hi) = target[j];
        let mut up_changes = node.changes.clone();
        up_changes.retain(|c| c.0 != j);
        let mut down_changes = up_changes.clone();
        up_changes.push((j, x.ceil(), hi));
        down_changes.push((j, lo, x.floor()));
        let up = Node {
            bound: objective,
            id: self.take_id(),
            changes: up_changes,
        };
        let down = Node {
            bound: objective,
            id: self.take_id(),
            changes: down_changes,
        };
        Ok(Ok(NodeResult::Branch(up, down)))
    }
}

/// Largest g such that every integral point has an objective in `constant + g * Z`, or 0
/// when continuous columns carry cost or the coefficients are not on a decimal grid.
fn objective_step(model: &MilpModel) -> f64 {
    let mut coefs = Vec::new();
    for (v, &c) in model.variables().iter().zip(model.objective()) {
        if c == 0.0 {
            continue;
        }
        if !v.kind.is_integral() {
            return 0.0;
        }
        coefs.push(c.abs());
    }
    if coefs.is_empty() {
        return 0.0;
    }
    for scale in [1.0, 10.0, 100.0, 1000.0, 10000.0] {
        let scaled: Vec<f64> = coefs.iter().map(|c| c * scale).collect();
        if scaled.iter().all(|x| (x - x.round()).abs() <= 1e-7 * x.max(1.0) && *x < 1e12) {
            let g = scaled.iter().fold(0u64, |g, x| gcd(g, x.round() as u64));
            return g as f64 / scale;
        }
    }
    0.0
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    (bound - incumbent).abs() / incumbent.abs().max(1e-9)
}

fn solve_with_highs(model: &MilpModel, limits: &SolveLimits) -> Result<Solution, MilpError> {
    let start = Instant::now();
    let mut stats = SolveStats::default();
    let mut backend = HighsBackend::new(model, true);
    if let Some(t) = limits.time_limit {
        backend.set_time_limit(t.as_secs_f64());
    }
    if let Some(x) = &limits.initial_solution {
        if x.len() == model.num_vars() {
            backend.set_start(x);
        }
    }
    let solved = backend.solve()?;
    stats.lp_iterations = backend.iterations;
    stats.seconds = start.elapsed().as_secs_f64();
    let finish = |values: Vec<f64>, optimal: bool, bound: Option<f64>, stats: SolveStats| {
        let mut values = values;
        for (v, x) in model.variables().iter().zip(values.iter_mut()) {
            if v.kind.is_integral() {
                *x = x.round();
            }
        }
        let objective = model.objective_value(&values);
        let bound = if optimal {
            objective
        } else {
            bound.unwrap_or(f64::INFINITY).max(objective)
        };
        let status = if optimal || bound <= objective + PRUNE_TOL {
            SolveStatus::Optimal
        } else {
            SolveStatus::Feasible {
                gap: relative_gap(objective, bound),
            }
        };
        Solution {
            status,
            values,
            objective,
            bound,
            stats,
        }
    };
    Ok(match solved.outcome {
        LpOutcome::Optimal { values, .. } => {
            let values = if values.is_empty() {
                vec![0.0; model.num_vars()]
            } else {
                values
            };
            if !values.is_empty() {
                stats.incumbent_trace.push((0, model.objective_value(&values)));
            }
            finish(values, true, None, stats)
        }
        LpOutcome::Infeasible => Solution::infeasible(stats),
        LpOutcome::Unbounded => return Err(MilpError::Unbounded),
        LpOutcome::Stopped { values: Some(values) } => {
            stats.incumbent_trace.push((0, model.objective_value(&values)));
            finish(values, false, solved.dual_bound, stats)
        }
        LpOutcome::Stopped { values: None } => Solution {
            status: SolveStatus::TimeLimit,
            values: Vec::new(),
            objective: f64::NAN,
            bound: solved.dual_bound.unwrap_or(f64::INFINITY),
            stats,
        },
    })
}
