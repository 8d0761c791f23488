//! Choosing the inspection order: discretized thresholds, the concave
//! assignment relaxation, randomized rounding, and the reduction for
//! instances with a few big variables.

mod cp;
mod general;
mod rounding;
mod tables;

pub use cp::{integral_objective, objective, solve_cp, solve_cp_from, Assignment, MAX_ITERATIONS};
pub use general::{coupled_value, order_general, GeneralOrdering, FIXING_CAP};
pub use rounding::{default_reps, induced_policy, order_small, order_small_seeded, round_assignment};
pub use tables::{build_grid, build_tables, level_count, AssignmentTables, ThresholdGrid, P_FLOOR};
