//! MILP modelling, an exact branch-and-bound solver backed by HiGHS LP
//! relaxations, CPLEX-LP export and a bridge to external solvers.

mod bnb;
mod error;
mod external;
mod lpfile;
mod model;
mod relax;
mod solution;

pub use bnb::{solve_exact, BranchRule, Engine, SolveLimits, INTEGRALITY_TOL};
pub use error::MilpError;
pub use external::{ExternalSolver, SOLVER_ENV};
pub use lpfile::{export_lp, lp_names, parse_external_solution, sanitize};
pub use model::{
    Constraint, ConstraintSense, MilpModel, ModelConfig, VarId, VarKind, Variable,
};
pub use solution::{Solution, SolveStats, SolveStatus};
