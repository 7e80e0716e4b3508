//! A self-contained CVRPTW heuristic: greedy cheapest-arc construction
//! followed by first-improvement local search under a wall-clock budget.
//!
//! The knobs mirror a classic routing-library parameter set: a first
//! solution strategy, a minimum accepted improvement (`optimization_step`,
//! in meters), a cap on accepted solutions, and a time limit.

mod construct;
mod matrix;
mod search;

pub use construct::path_cheapest_arc;
pub use matrix::{build_matrix, DistanceMatrix};
pub use search::{local_search, local_search_observed, AcceptedMove, MoveKind, SearchState, SearchStats, StopReason};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ProblemInstance, RoutePlan, VehicleId, WaypointId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FirstSolutionStrategy {
    /// Extend each route from its last node to the nearest feasible
    /// unvisited waypoint.
    PathCheapestArc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub first_solution: FirstSolutionStrategy,
    /// Minimum objective decrease, in meters, for a move to be accepted.
    pub optimization_step: f64,
    /// Maximum number of accepted improving moves.
    pub solution_limit: u64,
    pub time_limit_ms: u64,
    /// Rotates the move-scan starting points; results are a pure function
    /// of the seed and the instance whenever the time limit does not bind.
    pub rng_seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            first_solution: FirstSolutionStrategy::PathCheapestArc,
            optimization_step: 1.0,
            solution_limit: i64::MAX as u64,
            time_limit_ms: 5_000,
            rng_seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.time_limit_ms == 0 {
            return Err(SolveError::InvalidParams("time_limit_ms must be positive".into()));
        }
        if !(self.optimization_step.is_finite() && self.optimization_step > 0.0) {
            return Err(SolveError::InvalidParams("optimization_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("fleet cannot serve {} waypoint(s), first {}", .0.len(), .0[0])]
    UnassignedWaypoints(Vec<WaypointId>),
    #[error("no vehicles available")]
    NoVehicles,
    #[error("invalid solver parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: RoutePlan,
    pub busy_vehicles: Vec<VehicleId>,
    pub stats: SearchStats,
}

/// Matrix, construction, then local search. The returned plan always passes
/// [`validate_solution`](crate::model::validate_solution).
pub fn solve_cvrptw(instance: &ProblemInstance, params: &SolverParams) -> Result<Solution, SolveError> {
    params.validate()?;
    if instance.waypoints().is_empty() {
        return Ok(Solution { plan: RoutePlan::default(), busy_vehicles: vec![], stats: SearchStats::default() });
    }
    let matrix = build_matrix(instance);
    let initial = match params.first_solution {
        FirstSolutionStrategy::PathCheapestArc => path_cheapest_arc(instance, &matrix)?,
    };
    let (plan, stats) = local_search(&initial, instance, &matrix, params);
    let busy_vehicles = plan.busy_vehicles();
    Ok(Solution { plan, busy_vehicles, stats })
}
