//! Linear models, the exact branch-and-bound solver, and the two planning MILPs.

mod bnb;
mod lp_format;
mod model;
mod presolve;
mod projection;
mod rational;
mod reach;
mod simplex;

pub use bnb::solve;
pub use lp_format::{export_lp, import_solution, parse_lp};
pub use model::{normalize_row, Constraint, MilpModel, MilpSolution, Relation, SolveStatus, Variable};
pub use projection::{build_projection_milp, ProjectionLayout, ProjectionModel, ProjectionTrace};
pub use rational::Rational;
pub use reach::{build_reachability_milp, Enabledness, ReachLayout, ReachModel, ReachOptions, ReachTrace};
pub use simplex::{solve_lp, LpOutcome};

/// Default branch-and-bound node budget.
pub const DEFAULT_NODE_LIMIT: usize = 200_000;
