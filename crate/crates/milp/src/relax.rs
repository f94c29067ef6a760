//! Thin wrapper over HiGHS used for LP relaxations and as an optional MIP engine.

use highs::{Col, HighsModelStatus, HighsSolutionStatus, Model, RowProblem, Sense};

use crate::error::MilpError;
use crate::model::{ConstraintSense, MilpModel};

pub(crate) enum LpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
    /// Stopped by a limit, with the best primal point if HiGHS had one.
    Stopped { values: Option<Vec<f64>> },
}

pub(crate) struct Solved {
    pub outcome: LpOutcome,
    /// MIP dual bound when running HiGHS as a MIP engine.
    pub dual_bound: Option<f64>,
}

pub(crate) struct HighsBackend {
    model: Option<Model>,
    cols: Vec<Col>,
    bounds: Vec<(f64, f64)>,
    constant: f64,
    pub iterations: u64,
    /// HiGHS counts its time limit over all runs of one model.
    spent: f64,
}

fn clamp_inf(x: f64) -> f64 {
    if x >= 1e30 {
        f64::INFINITY
    } else if x <= -1e30 {
        f64::NEG_INFINITY
    } else {
        x
    }
}

impl HighsBackend {
    /// Builds the HiGHS model. With `integral = false` every column is continuous.
    pub fn new(model: &MilpModel, integral: bool) -> Self {
        let mut problem = RowProblem::default();
        let mut cols = Vec::with_capacity(model.num_vars());
        let mut bounds = Vec::with_capacity(model.num_vars());
        for (v, &cost) in model.variables().iter().zip(model.objective()) {
            let (lo, hi) = (clamp_inf(v.lower), clamp_inf(v.upper));
            let col = problem.add_column_with_integrality(
                cost,
                lo..=hi,
                integral && v.kind.is_integral(),
            );
            cols.push(col);
            bounds.push((lo, hi));
        }
        for row in model.constraints() {
            let factors = row.terms.iter().map(|&(v, c)| (cols[v.0], c));
            match row.sense {
                ConstraintSense::Le => problem.add_row(..=row.rhs, factors),
                ConstraintSense::Ge => problem.add_row(row.rhs.., factors),
                ConstraintSense::Eq => problem.add_row(row.rhs..=row.rhs, factors),
            }
        }
        let mut highs = problem.optimise(Sense::Maximise);
        highs.make_quiet();
        highs.set_option("threads", 1);
        highs.set_option("random_seed", 0);
        if integral {
            highs.set_option("mip_rel_gap", 0.0);
            highs.set_option("mip_abs_gap", 1e-7);
            highs.set_option("mip_feasibility_tolerance", 1e-7);
        } else {
            highs.set_option("presolve", "off");
            highs.set_option("solver", "simplex");
        }
        Self {
            model: Some(highs),
            cols,
            bounds,
            constant: model.objective_constant,
            iterations: 0,
            spent: 0.0,
        }
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        if self.bounds[j] != (lo, hi) {
            self.bounds[j] = (lo, hi);
            if let Some(m) = self.model.as_mut() {
                m.change_column_bounds(self.cols[j], lo..=hi);
            }
        }
    }

    /// Limits the next solve to `seconds`.
    pub fn set_time_limit(&mut self, seconds: f64) {
        let total = self.spent + seconds.max(1e-3);
        if let Some(m) = self.model.as_mut() {
            m.set_option("time_limit", total);
        }
    }

    pub fn set_start(&mut self, values: &[f64]) {
        if let Some(m) = self.model.as_mut() {
            if m.try_set_solution(Some(values), None, None, None).is_err() {
                log::warn!("HiGHS rejected the initial solution");
            }
        }
    }

    pub fn solve(&mut self) -> Result<Solved, MilpError> {
        let model = self.model.take().expect("backend model present");
        let started = std::time::Instant::now();
        let solved = model
            .try_solve()
            .map_err(|e| MilpError::Relaxation(format!("{e:?}")))?;
        self.spent += started.elapsed().as_secs_f64();
        self.iterations += solved.simplex_iteration_count().max(0) as u64;
        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let dual_bound = solved
            .double_info_value(c"mip_dual_bound")
            .ok()
            .filter(|b| b.is_finite())
            .map(|b| b + self.constant);
        let outcome = match solved.status() {
            HighsModelStatus::Optimal => LpOutcome::Optimal {
                objective: solved.objective_value() + self.constant,
                values: solved.get_solution().columns().to_vec(),
            },
            HighsModelStatus::ModelEmpty => LpOutcome::Optimal {
                objective: self.constant,
                values: Vec::new(),
            },
            HighsModelStatus::Infeasible => LpOutcome::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                LpOutcome::Unbounded
            }
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt => LpOutcome::Stopped {
                values: has_primal.then(|| solved.get_solution().columns().to_vec()),
            },
            other => {
                return Err(MilpError::Relaxation(format!(
                    "unexpected HiGHS status {other:?}"
                )))
            }
        };
        self.model = Some(Model::from(solved));
        Ok(Solved {
            outcome,
            dual_bound,
        })
    }
}
