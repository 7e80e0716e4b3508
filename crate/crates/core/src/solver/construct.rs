use crate::model::{schedule_route, ProblemInstance, Route, RoutePlan, Seconds, WaypointId};

use super::{DistanceMatrix, SolveError};

/// Greedy construction: vehicles are opened in fleet order and each route is
/// extended from its last node to the nearest unvisited waypoint that still
/// fits the remaining capacity and can be served within its window. Ties go
/// to the lowest waypoint id. Vehicles left idle get no route.
pub fn path_cheapest_arc(instance: &ProblemInstance, matrix: &DistanceMatrix) -> Result<RoutePlan, SolveError> {
    let n = instance.waypoints().len();
    if n == 0 {
        return Ok(RoutePlan::default());
    }
    if instance.vehicles().is_empty() {
        return Err(SolveError::NoVehicles);
    }
    let travel = instance.travel();
    let start = instance.depot().pickup_window.earliest;
    let mut visited = vec![false; n + 1];
    let mut remaining = n;
    let mut routes = Vec::new();

    for vehicle in instance.vehicles() {
        if remaining == 0 {
            break;
        }
        let mut stops = Vec::new();
        let (mut last, mut load, mut clock): (usize, u32, Seconds) = (0, 0, start);
        loop {
            let row = matrix.row(last);
            let mut best: Option<(usize, f64)> = None;
            for (j, w) in (1..=n).zip(instance.waypoints()) {
                if visited[j] || load + w.demand > vehicle.capacity {
                    continue;
                }
                let d = row[j];
                if best.is_some_and(|(_, bd)| d >= bd) {
                    continue;
                }
                let service = (clock + travel.travel_time(d)).max(w.window.earliest);
                if service <= w.window.latest {
                    best = Some((j, d));
                }
            }
            let Some((j, d)) = best else { break };
            let w = &instance.waypoints()[j - 1];
            clock = (clock + travel.travel_time(d)).max(w.window.earliest) + w.service_duration;
            load += w.demand;
            visited[j] = true;
            remaining -= 1;
            last = j;
            stops.push(w.id);
        }
        if !stops.is_empty() {
            routes.push(scheduled(vehicle.id, &stops, instance));
        }
    }

    if remaining > 0 {
        let missing = (1..=n).filter(|&j| !visited[j]).map(|j| WaypointId(j as u32)).collect();
        return Err(SolveError::UnassignedWaypoints(missing));
    }
    Ok(RoutePlan { routes })
}

pub(super) fn scheduled(vehicle: crate::model::VehicleId, stops: &[WaypointId], instance: &ProblemInstance) -> Route {
    schedule_route(vehicle, stops, instance).expect("solver produced a time-infeasible route")
}
