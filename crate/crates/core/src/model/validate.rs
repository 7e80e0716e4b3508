use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{Node, ProblemInstance, RoutePlan, Seconds, TimeWindow, VehicleId, WaypointId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    Unvisited,
    MultiplyVisited,
    Capacity,
    TimeWindow,
    DepotWindow,
    VehicleReuse,
    TimingInconsistent,
    UnknownWaypoint,
    UnknownVehicle,
}

/// One broken constraint, with the ids and amounts involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    Unvisited { waypoint: WaypointId },
    MultiplyVisited { waypoint: WaypointId, visits: usize },
    Capacity { vehicle: VehicleId, load: u64, capacity: u32 },
    TimeWindow { vehicle: VehicleId, waypoint: WaypointId, service_start: Seconds, window: TimeWindow },
    DepotWindow { vehicle: VehicleId, pickup_time: Seconds, window: TimeWindow },
    VehicleReuse { vehicle: VehicleId, routes: usize },
    TimingInconsistent { vehicle: VehicleId, waypoint: WaypointId, expected_arrival: Seconds, recorded_arrival: Seconds },
    UnknownWaypoint { vehicle: VehicleId, waypoint: WaypointId },
    UnknownVehicle { vehicle: VehicleId },
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::Unvisited { .. } => ViolationKind::Unvisited,
            Violation::MultiplyVisited { .. } => ViolationKind::MultiplyVisited,
            Violation::Capacity { .. } => ViolationKind::Capacity,
            Violation::TimeWindow { .. } => ViolationKind::TimeWindow,
            Violation::DepotWindow { .. } => ViolationKind::DepotWindow,
            Violation::VehicleReuse { .. } => ViolationKind::VehicleReuse,
            Violation::TimingInconsistent { .. } => ViolationKind::TimingInconsistent,
            Violation::UnknownWaypoint { .. } => ViolationKind::UnknownWaypoint,
            Violation::UnknownVehicle { .. } => ViolationKind::UnknownVehicle,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unvisited { waypoint } => write!(f, "waypoint {waypoint} is not visited"),
            Violation::MultiplyVisited { waypoint, visits } => write!(f, "waypoint {waypoint} is visited {visits} times"),
            Violation::Capacity { vehicle, load, capacity } => {
                write!(f, "vehicle {vehicle} carries {load}, capacity {capacity}")
            }
            Violation::TimeWindow { vehicle, waypoint, service_start, window } => write!(
                f,
                "vehicle {vehicle} starts service at waypoint {waypoint} at {service_start}, outside {window}"
            ),
            Violation::DepotWindow { vehicle, pickup_time, window } => {
                write!(f, "vehicle {vehicle} picks up at {pickup_time}, outside depot window {window}")
            }
            Violation::VehicleReuse { vehicle, routes } => write!(f, "vehicle {vehicle} drives {routes} routes"),
            Violation::TimingInconsistent { vehicle, waypoint, expected_arrival, recorded_arrival } => write!(
                f,
                "vehicle {vehicle} records arrival {recorded_arrival} at waypoint {waypoint}, travel model gives {expected_arrival}"
            ),
            Violation::UnknownWaypoint { vehicle, waypoint } => {
                write!(f, "vehicle {vehicle} visits unknown waypoint {waypoint}")
            }
            Violation::UnknownVehicle { vehicle } => write!(f, "unknown vehicle {vehicle}"),
        }
    }
}

/// Checks a plan against every constraint of the problem. Returns an empty
/// list exactly when the plan is feasible.
///
/// Violations are reported in a fixed order: per-route problems in route
/// order, then vehicle reuse, then visit counts by ascending waypoint id.
pub fn validate_solution(plan: &RoutePlan, instance: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut visits = vec![0usize; instance.waypoints().len()];
    let mut vehicle_routes: HashMap<VehicleId, usize> = HashMap::new();

    for route in &plan.routes {
        let vehicle = route.vehicle;
        *vehicle_routes.entry(vehicle).or_default() += 1;
        let capacity = match instance.vehicle(vehicle) {
            Some(v) => Some(v.capacity),
            None => {
                out.push(Violation::UnknownVehicle { vehicle });
                None
            }
        };

        let window = instance.depot().pickup_window;
        if !window.contains(route.pickup_time) {
            out.push(Violation::DepotWindow { vehicle, pickup_time: route.pickup_time, window });
        }

        let mut load = 0u64;
        let mut prev = Node::Depot;
        // Expected clock under the travel recurrence; None once the chain is
        // broken by an unknown waypoint.
        let mut clock = Some(route.pickup_time);
        for stop in &route.stops {
            let Some(w) = instance.waypoint(stop.waypoint) else {
                out.push(Violation::UnknownWaypoint { vehicle, waypoint: stop.waypoint });
                clock = None;
                continue;
            };
            visits[w.id.index()] += 1;
            load += u64::from(w.demand);

            let node = Node::Waypoint(w.id);
            if let Some(c) = clock {
                let expected = c + instance.arc_time(prev, node).expect("both nodes exist");
                if expected != stop.arrival {
                    out.push(Violation::TimingInconsistent {
                        vehicle,
                        waypoint: w.id,
                        expected_arrival: expected,
                        recorded_arrival: stop.arrival,
                    });
                }
                clock = Some(expected.max(w.window.earliest) + w.service_duration);
            }
            let service_start = stop.arrival.max(w.window.earliest);
            if service_start > w.window.latest {
                out.push(Violation::TimeWindow { vehicle, waypoint: w.id, service_start, window: w.window });
            }
            prev = node;
        }
        if let Some(capacity) = capacity {
            if load > u64::from(capacity) {
                out.push(Violation::Capacity { vehicle, load, capacity });
            }
        }
    }

    let mut reused: Vec<_> = vehicle_routes.into_iter().filter(|&(_, n)| n > 1).collect();
    reused.sort();
    out.extend(reused.into_iter().map(|(vehicle, routes)| Violation::VehicleReuse { vehicle, routes }));

    for (i, &n) in visits.iter().enumerate() {
        let waypoint = WaypointId(i as u32 + 1);
        match n {
            0 => out.push(Violation::Unvisited { waypoint }),
            1 => {}
            visits => out.push(Violation::MultiplyVisited { waypoint, visits }),
        }
    }
    out
}
