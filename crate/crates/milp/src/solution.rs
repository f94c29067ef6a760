use crate::model::{MilpModel, VarId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveStatus {
    Optimal,
    /// Incumbent found but optimality not proven; `gap` is relative to the incumbent.
    Feasible { gap: f64 },
    Infeasible,
    /// Budget exhausted before any incumbent was found.
    TimeLimit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible { .. })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible { .. } => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub seconds: f64,
    /// (node count, objective) each time the incumbent improved.
    pub incumbent_trace: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// One value per model variable; empty when there is no solution.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best known upper bound on the optimum (maximisation).
    pub bound: f64,
    pub stats: SolveStats,
}

impl Solution {
    pub fn infeasible(stats: SolveStats) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            stats,
        }
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.values.get(var.0).copied().unwrap_or(0.0)
    }

    pub fn value_of(&self, model: &MilpModel, label: &str) -> Option<f64> {
        model.var_by_label(label).map(|v| self.value(v))
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
