//! Problem instances, route plans, and their evaluation.
//!
//! A [`ProblemInstance`] is immutable once built: [`ProblemInstance::new`]
//! checks every structural invariant (contiguous ids, coordinate bounds,
//! sane windows, demands that fit at least one vehicle), so downstream code
//! can index freely.
//!
//! Routes are open. A vehicle starts at the depot and ends at its last
//! delivery; the arc back to the depot costs neither time nor distance.

mod io;
mod schedule;
mod validate;

pub use io::{InstanceFile, PlanFile};
pub use schedule::{propagate_schedule, schedule_route, ScheduleError};
pub use validate::{validate_solution, Violation, ViolationKind};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_distance, GeoPoint};

/// Seconds since the instance epoch.
pub type Seconds = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WaypointId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub u32);

impl fmt::Display for WaypointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl WaypointId {
    /// Position of this waypoint in [`ProblemInstance::waypoints`].
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl VehicleId {
    /// Position of this vehicle in a fleet numbered from 1.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unknown waypoint {0}")]
    UnknownWaypoint(WaypointId),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::InvalidInstance(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub earliest: Seconds,
    pub latest: Seconds,
}

impl TimeWindow {
    pub fn new(earliest: Seconds, latest: Seconds) -> Result<Self, ModelError> {
        if earliest < 0 || earliest > latest {
            return Err(invalid(format!("bad time window [{earliest}, {latest}]")));
        }
        Ok(TimeWindow { earliest, latest })
    }

    pub fn contains(&self, t: Seconds) -> bool {
        self.earliest <= t && t <= self.latest
    }
}

impl fmt::Display for TimeWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.earliest, self.latest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waypoint {
    pub id: WaypointId,
    pub location: GeoPoint,
    pub demand: u32,
    pub window: TimeWindow,
    pub service_duration: Seconds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Depot {
    pub location: GeoPoint,
    pub pickup_window: TimeWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub capacity: u32,
}

/// Identical for every vehicle; the fleet is homogeneous in speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelModel {
    pub speed_mps: f64,
    pub open_routes: bool,
}

impl TravelModel {
    pub fn new(speed_mps: f64) -> Result<Self, ModelError> {
        if !(speed_mps.is_finite() && speed_mps > 0.0) {
            return Err(invalid(format!("speed must be positive, got {speed_mps}")));
        }
        Ok(TravelModel { speed_mps, open_routes: true })
    }

    /// Whole seconds needed to drive `meters`.
    pub fn travel_time(&self, meters: f64) -> Seconds {
        (meters / self.speed_mps).round() as Seconds
    }
}

/// A node of the routing graph: the depot or one waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Depot,
    Waypoint(WaypointId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    depot: Depot,
    waypoints: Vec<Waypoint>,
    vehicles: Vec<Vehicle>,
    travel: TravelModel,
}

impl ProblemInstance {
    pub fn new(
        depot: Depot,
        waypoints: Vec<Waypoint>,
        vehicles: Vec<Vehicle>,
        travel: TravelModel,
    ) -> Result<Self, ModelError> {
        if !depot.location.is_valid() {
            return Err(invalid("depot coordinates out of range"));
        }
        for (i, v) in vehicles.iter().enumerate() {
            if v.id.0 as usize != i + 1 {
                return Err(invalid(format!("vehicle ids must be 1..=M in order; position {} has id {}", i + 1, v.id)));
            }
            if v.capacity == 0 {
                return Err(invalid(format!("vehicle {} has zero capacity", v.id)));
            }
        }
        let max_capacity = vehicles.iter().map(|v| v.capacity).max().unwrap_or(0);
        for (i, w) in waypoints.iter().enumerate() {
            if w.id.0 as usize != i + 1 {
                return Err(invalid(format!("waypoint ids must be 1..=N in order; position {} has id {}", i + 1, w.id)));
            }
            if !w.location.is_valid() {
                return Err(invalid(format!("waypoint {} coordinates out of range", w.id)));
            }
            if w.window.earliest < 0 || w.window.earliest > w.window.latest {
                return Err(invalid(format!("waypoint {} has bad window {}", w.id, w.window)));
            }
            if w.service_duration < 0 {
                return Err(invalid(format!("waypoint {} has negative service duration", w.id)));
            }
            if w.demand > max_capacity {
                return Err(invalid(format!(
                    "waypoint {} demand {} exceeds the largest vehicle capacity {}",
                    w.id, w.demand, max_capacity
                )));
            }
        }
        let pw = depot.pickup_window;
        if pw.earliest < 0 || pw.earliest > pw.latest {
            return Err(invalid(format!("depot has bad pickup window {pw}")));
        }
        Ok(ProblemInstance { depot, waypoints, vehicles, travel })
    }

    pub fn depot(&self) -> &Depot {
        &self.depot
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn travel(&self) -> &TravelModel {
        &self.travel
    }

    pub fn waypoint(&self, id: WaypointId) -> Option<&Waypoint> {
        (id.0 >= 1).then(|| self.waypoints.get(id.index())).flatten()
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&Vehicle> {
        (id.0 >= 1).then(|| self.vehicles.get(id.0 as usize - 1)).flatten()
    }

    pub fn location(&self, node: Node) -> Option<GeoPoint> {
        match node {
            Node::Depot => Some(self.depot.location),
            Node::Waypoint(id) => self.waypoint(id).map(|w| w.location),
        }
    }

    /// Driven distance of the arc `from → to`. Arcs into the depot are free
    /// because routes are open.
    pub fn arc_distance(&self, from: Node, to: Node) -> Result<f64, ModelError> {
        let a = self.location(from).ok_or_else(|| unknown(from))?;
        let b = self.location(to).ok_or_else(|| unknown(to))?;
        if to == Node::Depot && self.travel.open_routes {
            return Ok(0.0);
        }
        Ok(haversine_distance(a, b))
    }

    pub fn arc_time(&self, from: Node, to: Node) -> Result<Seconds, ModelError> {
        self.arc_distance(from, to).map(|d| self.travel.travel_time(d))
    }
}

fn unknown(node: Node) -> ModelError {
    match node {
        Node::Waypoint(id) => ModelError::UnknownWaypoint(id),
        Node::Depot => unreachable!("the depot always has a location"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopVisit {
    pub waypoint: WaypointId,
    pub arrival: Seconds,
    /// `max(arrival, earliest) + service_duration`.
    pub departure: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub vehicle: VehicleId,
    /// Time the vehicle leaves the depot with its load.
    pub pickup_time: Seconds,
    pub stops: Vec<StopVisit>,
}

impl Route {
    pub fn stop_ids(&self) -> Vec<WaypointId> {
        self.stops.iter().map(|s| s.waypoint).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }
}

/// The solution: `x_ijk = 1` iff `j` directly follows `i` in vehicle `k`'s
/// stop list (with the depot implicitly first).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoutePlan {
    pub routes: Vec<Route>,
}

impl RoutePlan {
    pub fn busy_vehicles(&self) -> Vec<VehicleId> {
        let mut ids: Vec<_> = self.routes.iter().filter(|r| !r.is_empty()).map(|r| r.vehicle).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn stop_count(&self) -> usize {
        self.routes.iter().map(|r| r.stops.len()).sum()
    }
}

/// Total driven distance in meters: the depot-to-first-stop arc plus every
/// arc between consecutive stops, with no return leg.
pub fn evaluate_objective(plan: &RoutePlan, instance: &ProblemInstance) -> Result<f64, ModelError> {
    let mut total = 0.0;
    for route in &plan.routes {
        total += route_distance(&route.stop_ids(), instance)?;
    }
    Ok(total)
}

pub(crate) fn route_distance(stops: &[WaypointId], instance: &ProblemInstance) -> Result<f64, ModelError> {
    let mut prev = Node::Depot;
    let mut total = 0.0;
    for &id in stops {
        let next = Node::Waypoint(id);
        total += instance.arc_distance(prev, next)?;
        prev = next;
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Waypoints at the given positions with demand 1, the full-day window,
    /// and `vehicles` vehicles of capacity `capacity`, speed 10 m/s.
    pub fn instance(depot: GeoPoint, points: &[GeoPoint], vehicles: u32, capacity: u32) -> ProblemInstance {
        let day = TimeWindow::new(0, 86_400).unwrap();
        let waypoints = points
            .iter()
            .enumerate()
            .map(|(i, &p)| Waypoint {
                id: WaypointId(i as u32 + 1),
                location: p,
                demand: 1,
                window: day,
                service_duration: 0,
            })
            .collect();
        let vehicles = (1..=vehicles).map(|k| Vehicle { id: VehicleId(k), capacity }).collect();
        ProblemInstance::new(
            Depot { location: depot, pickup_window: day },
            waypoints,
            vehicles,
            TravelModel::new(10.0).unwrap(),
        )
        .unwrap()
    }

    /// A point `meters` east of `origin` along its parallel.
    pub fn east_of(origin: GeoPoint, meters: f64) -> GeoPoint {
        let dlon = (meters / crate::geo::METERS_PER_RADIAN / origin.lat.to_radians().cos()).to_degrees();
        GeoPoint::new(origin.lat, origin.lon + dlon)
    }

    pub fn north_of(origin: GeoPoint, meters: f64) -> GeoPoint {
        GeoPoint::new(origin.lat + (meters / crate::geo::METERS_PER_RADIAN).to_degrees(), origin.lon)
    }
}
