//! End-to-end strategies: solve the whole instance at once, or cluster the
//! waypoints and solve cluster by cluster while handing out vehicles from a
//! shared, shrinking pool.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clusterer::{
    binary_search_clusters, cluster_order, recursive_dbscan, ClusterConfig, ClusterError, ClusterSet, Feasibility,
};
use crate::geo::GeoPoint;
use crate::model::{
    evaluate_objective, validate_solution, ProblemInstance, Route, RoutePlan, StopVisit, Vehicle, VehicleId,
    Violation, Waypoint, WaypointId,
};
use crate::solver::{solve_cvrptw, SolveError, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Monolithic,
    Dbscan,
    RecursiveDbscan,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Monolithic, Strategy::Dbscan, Strategy::RecursiveDbscan];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Monolithic => "monolithic",
            Strategy::Dbscan => "dbscan",
            Strategy::RecursiveDbscan => "recursive-dbscan",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown strategy {0:?} (expected monolithic, dbscan or recursive-dbscan)")]
pub struct ParseStrategyError(String);

impl FromStr for Strategy {
    type Err = ParseStrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ParseStrategyError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("no solution found: vehicle pool exhausted before cluster {cluster}")]
    VehiclesExhausted { cluster: usize },
    #[error("no solution found: {0}")]
    Solve(#[from] SolveError),
    #[error("clustering failed: {0}")]
    Cluster(#[from] ClusterError),
    #[error("clusters do not partition the {0} waypoints")]
    NotAPartition(usize),
    #[error("plan failed validation: {}", .0[0])]
    InvalidPlan(Vec<Violation>),
}

impl PipelineError {
    /// Whether this is the algorithmic "no solution" outcome rather than a
    /// configuration or internal error.
    pub fn is_no_solution(&self) -> bool {
        match self {
            PipelineError::VehiclesExhausted { .. } => true,
            PipelineError::Solve(e) => matches!(e, SolveError::UnassignedWaypoints(_) | SolveError::NoVehicles),
            PipelineError::Cluster(e) => matches!(e, ClusterError::NoSolutionFound | ClusterError::RecursionLimit(_)),
            _ => false,
        }
    }
}

/// A failed run still reports how long it took.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error} (after {} ms)", wall_time.as_millis())]
pub struct PipelineFailure {
    pub error: PipelineError,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub plan: RoutePlan,
    pub wall_time: Duration,
    pub total_distance: f64,
    pub busy_vehicle_count: usize,
    /// Zero for the monolithic strategy.
    pub cluster_count: usize,
    pub peak_cluster_size: usize,
}

pub(crate) fn waypoint_points(instance: &ProblemInstance) -> Vec<GeoPoint> {
    instance.waypoints().iter().map(|w| w.location).collect()
}

/// The depot, one cluster's waypoints renumbered from 1, and the free
/// vehicles renumbered from 1.
fn sub_instance(instance: &ProblemInstance, members: &[usize], pool: &[VehicleId]) -> ProblemInstance {
    let waypoints = members
        .iter()
        .enumerate()
        .map(|(k, &i)| Waypoint { id: WaypointId(k as u32 + 1), ..instance.waypoints()[i].clone() })
        .collect();
    let vehicles = pool
        .iter()
        .enumerate()
        .map(|(k, id)| Vehicle { id: VehicleId(k as u32 + 1), capacity: instance.vehicle(*id).expect("pool vehicle").capacity })
        .collect();
    ProblemInstance::new(instance.depot().clone(), waypoints, vehicles, *instance.travel())
        .expect("a sub-instance of a valid instance is valid")
}

/// Solves clusters one at a time in [`cluster_order`]. Each sub-solve sees
/// only the vehicles no earlier cluster used.
pub fn optimise_clusters(
    clusters: &ClusterSet,
    instance: &ProblemInstance,
    params: &SolverParams,
) -> Result<RoutePlan, PipelineError> {
    let n = instance.waypoints().len();
    if !clusters.is_partition_of(n) {
        return Err(PipelineError::NotAPartition(n));
    }
    let points = waypoint_points(instance);
    let mut pool: Vec<VehicleId> = instance.vehicles().iter().map(|v| v.id).collect();
    pool.sort();
    let mut routes = Vec::new();

    for (step, c) in cluster_order(clusters, &points, instance.depot().location).into_iter().enumerate() {
        if pool.is_empty() {
            return Err(PipelineError::VehiclesExhausted { cluster: step });
        }
        let members = &clusters.clusters[c].members;
        let sub = sub_instance(instance, members, &pool);
        let solution = solve_cvrptw(&sub, params)?;
        for route in solution.plan.routes {
            routes.push(Route {
                vehicle: pool[route.vehicle.index()],
                pickup_time: route.pickup_time,
                stops: route
                    .stops
                    .iter()
                    .map(|s| StopVisit { waypoint: instance.waypoints()[members[s.waypoint.index()]].id, ..*s })
                    .collect(),
            });
        }
        let before = pool.len();
        let busy: Vec<usize> = solution.busy_vehicles.iter().map(|v| v.index()).collect();
        pool = pool.iter().enumerate().filter(|(k, _)| !busy.contains(k)).map(|(_, &id)| id).collect();
        assert!(pool.len() <= before, "vehicle pool grew");
    }
    Ok(RoutePlan { routes })
}

/// Runs one strategy end to end. Wall time covers clustering and every
/// solve, and is reported on failure too.
pub fn run_strategy(
    instance: &ProblemInstance,
    strategy: Strategy,
    config: &ClusterConfig,
    params: &SolverParams,
) -> Result<PipelineResult, PipelineFailure> {
    let start = Instant::now();
    let fail = |error: PipelineError| PipelineFailure { error, wall_time: start.elapsed() };
    let n = instance.waypoints().len();

    let (plan, clusters) = match strategy {
        Strategy::Monolithic => (solve_cvrptw(instance, params).map_err(|e| fail(e.into()))?.plan, None),
        Strategy::Dbscan | Strategy::RecursiveDbscan if n == 0 => (RoutePlan::default(), Some(ClusterSet::default())),
        Strategy::Dbscan => {
            let points = waypoint_points(instance);
            let outcome = binary_search_clusters(&points, config, Feasibility::MaxSizeCap).map_err(|e| fail(e.into()))?;
            let plan = optimise_clusters(&outcome.clusters, instance, params).map_err(fail)?;
            (plan, Some(outcome.clusters))
        }
        Strategy::RecursiveDbscan => {
            let points = waypoint_points(instance);
            let set = recursive_dbscan(&points, config).map_err(|e| fail(e.into()))?;
            let plan = optimise_clusters(&set, instance, params).map_err(fail)?;
            (plan, Some(set))
        }
    };

    let violations = validate_solution(&plan, instance);
    if !violations.is_empty() {
        return Err(fail(PipelineError::InvalidPlan(violations)));
    }
    let total_distance = evaluate_objective(&plan, instance).expect("validated plan");
    let wall_time = start.elapsed();
    let (cluster_count, peak_cluster_size) = match &clusters {
        Some(set) => (set.len(), set.peak_size()),
        None => (0, n),
    };
    Ok(PipelineResult {
        busy_vehicle_count: plan.busy_vehicles().len(),
        plan,
        wall_time,
        total_distance,
        cluster_count,
        peak_cluster_size,
    })
}
