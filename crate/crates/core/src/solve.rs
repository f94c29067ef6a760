//! Build, solve and extract in one call.

use std::time::Instant;

use firebreak_milp::{solve_exact, ExternalSolver, Solution, SolveLimits};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::multiscenario;
use crate::plan::{evaluate, Evaluation, Plan};
use crate::stochastic::{self, StochasticModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    #[default]
    TwoStage,
    Multi,
}

impl std::str::FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "two-stage" | "two_stage" | "stochastic" => Ok(Formulation::TwoStage),
            "multi" | "multi-scenario" => Ok(Formulation::Multi),
            other => Err(format!("unknown model `{other}` (expected two-stage or multi)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub formulation: Formulation,
    pub limits: SolveLimits,
    /// Solve through an external solver instead of the built-in search.
    pub external: Option<ExternalSolver>,
    /// Feasible plan handed to the search as its first incumbent.
    pub warm_start: Option<Plan>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: Plan,
    pub evaluation: Evaluation,
    pub solution: Solution,
    pub num_vars: usize,
    pub num_rows: usize,
    /// Model build plus solve, wall clock.
    pub seconds: f64,
}

pub fn build_model(instance: &Instance, formulation: Formulation) -> Result<StochasticModel> {
    match formulation {
        Formulation::TwoStage => stochastic::build(instance),
        Formulation::Multi => multiscenario::build_multi(instance),
    }
}

pub fn solve(instance: &Instance, options: &SolveOptions) -> Result<SolveOutcome> {
    let started = Instant::now();
    let h = build_model(instance, options.formulation)?;
    let mut limits = options.limits.clone();
    if let Some(plan) = &options.warm_start {
        match multiscenario::plan_to_assignment(&h, instance, plan) {
            Ok(values) => {
                let worst = h.model.max_violation(&values);
                if worst <= 1e-6 {
                    limits.initial_solution = Some(values);
                } else {
                    log::warn!("warm-start plan violates the model by {worst:.3e}; ignored");
                }
            }
            Err(e) => log::warn!("warm-start plan not usable: {e}"),
        }
    }
    let solution = match &options.external {
        Some(ext) => ext.solve(&h.model, limits.time_limit.map(|d| d.as_secs_f64()))?,
        None => solve_exact(&h.model, &limits)?,
    };
    if !solution.status.has_solution() {
        return Err(Error::Solver(format!(
            "no feasible solution (status {})",
            solution.status.as_str()
        )));
    }
    let plan = stochastic::extract_plan(&h, &solution, instance)?;
    let evaluation = evaluate(instance, &plan)?;
    Ok(SolveOutcome {
        plan,
        evaluation,
        num_vars: h.model.num_vars(),
        num_rows: h.model.num_constraints(),
        solution,
        seconds: started.elapsed().as_secs_f64(),
    })
}
