//! JSON file formats for instances and plans.

use serde::{Deserialize, Serialize};

use super::{
    Depot, ModelError, ProblemInstance, Route, RoutePlan, Seconds, StopVisit, TimeWindow, TravelModel, Vehicle,
    VehicleId, Waypoint, WaypointId,
};
use crate::geo::GeoPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub depot: DepotRecord,
    pub waypoints: Vec<WaypointRecord>,
    pub vehicles: Vec<VehicleRecord>,
    pub travel: TravelRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotRecord {
    pub lat: f64,
    pub lon: f64,
    pub window: [Seconds; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointRecord {
    pub id: u32,
    pub lat: f64,
    pub lon: f64,
    pub demand: u32,
    pub window: [Seconds; 2],
    #[serde(default, skip_serializing_if = "is_zero")]
    pub service: Seconds,
}

fn is_zero(s: &Seconds) -> bool {
    *s == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub id: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelRecord {
    pub speed_mps: f64,
}

impl From<&ProblemInstance> for InstanceFile {
    fn from(inst: &ProblemInstance) -> Self {
        let d = inst.depot();
        InstanceFile {
            depot: DepotRecord {
                lat: d.location.lat,
                lon: d.location.lon,
                window: [d.pickup_window.earliest, d.pickup_window.latest],
            },
            waypoints: inst
                .waypoints()
                .iter()
                .map(|w| WaypointRecord {
                    id: w.id.0,
                    lat: w.location.lat,
                    lon: w.location.lon,
                    demand: w.demand,
                    window: [w.window.earliest, w.window.latest],
                    service: w.service_duration,
                })
                .collect(),
            vehicles: inst.vehicles().iter().map(|v| VehicleRecord { id: v.id.0, capacity: v.capacity }).collect(),
            travel: TravelRecord { speed_mps: inst.travel().speed_mps },
        }
    }
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = ModelError;

    fn try_from(file: InstanceFile) -> Result<Self, ModelError> {
        let depot = Depot {
            location: GeoPoint::new(file.depot.lat, file.depot.lon),
            pickup_window: TimeWindow::new(file.depot.window[0], file.depot.window[1])?,
        };
        let waypoints = file
            .waypoints
            .into_iter()
            .map(|w| {
                Ok(Waypoint {
                    id: WaypointId(w.id),
                    location: GeoPoint::new(w.lat, w.lon),
                    demand: w.demand,
                    window: TimeWindow::new(w.window[0], w.window[1])?,
                    service_duration: w.service,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let vehicles = file.vehicles.into_iter().map(|v| Vehicle { id: VehicleId(v.id), capacity: v.capacity }).collect();
        ProblemInstance::new(depot, waypoints, vehicles, TravelModel::new(file.travel.speed_mps)?)
    }
}

impl ProblemInstance {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::InvalidInstance(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub routes: Vec<RouteRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub vehicle: u32,
    pub pickup_time: Seconds,
    pub stops: Vec<StopRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRecord {
    pub id: u32,
    pub arrival: Seconds,
}

impl From<&RoutePlan> for PlanFile {
    fn from(plan: &RoutePlan) -> Self {
        PlanFile {
            routes: plan
                .routes
                .iter()
                .map(|r| RouteRecord {
                    vehicle: r.vehicle.0,
                    pickup_time: r.pickup_time,
                    stops: r.stops.iter().map(|s| StopRecord { id: s.waypoint.0, arrival: s.arrival }).collect(),
                })
                .collect(),
        }
    }
}

impl PlanFile {
    /// Rebuilds a plan; departures are derived from recorded arrivals. Ids
    /// the instance does not know are kept so the validator can flag them.
    pub fn into_plan(self, instance: &ProblemInstance) -> RoutePlan {
        let routes = self
            .routes
            .into_iter()
            .map(|r| Route {
                vehicle: VehicleId(r.vehicle),
                pickup_time: r.pickup_time,
                stops: r
                    .stops
                    .into_iter()
                    .map(|s| {
                        let id = WaypointId(s.id);
                        let departure = instance
                            .waypoint(id)
                            .map_or(s.arrival, |w| s.arrival.max(w.window.earliest) + w.service_duration);
                        StopVisit { waypoint: id, arrival: s.arrival, departure }
                    })
                    .collect(),
            })
            .collect();
        RoutePlan { routes }
    }
}

impl RoutePlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PlanFile::from(self)).expect("plan serializes")
    }

    pub fn from_json(text: &str, instance: &ProblemInstance) -> Result<Self, serde_json::Error> {
        let file: PlanFile = serde_json::from_str(text)?;
        Ok(file.into_plan(instance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{schedule_route, validate_solution};

    const SAMPLE: &str = r#"{
        "depot": {"lat": 22.3, "lon": 114.2, "window": [0, 3600]},
        "waypoints": [
            {"id": 1, "lat": 22.31, "lon": 114.2, "demand": 3, "window": [0, 43200]},
            {"id": 2, "lat": 22.32, "lon": 114.21, "demand": 2, "window": [600, 7200], "service": 120}
        ],
        "vehicles": [{"id": 1, "capacity": 30}, {"id": 2, "capacity": 30}],
        "travel": {"speed_mps": 10.0}
    }"#;

    #[test]
    fn parses_instance() {
        let inst = ProblemInstance::from_json(SAMPLE).unwrap();
        assert_eq!(inst.waypoints().len(), 2);
        assert_eq!(inst.waypoints()[1].service_duration, 120);
        assert_eq!(inst.waypoints()[0].service_duration, 0);
        assert_eq!(inst.vehicles().len(), 2);
        let again = ProblemInstance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn rejects_malformed_instance() {
        assert!(ProblemInstance::from_json("{}").is_err());
        let bad = SAMPLE.replace("\"demand\": 3", "\"demand\": 99");
        assert!(ProblemInstance::from_json(&bad).is_err());
    }

    #[test]
    fn plan_round_trip() {
        let inst = ProblemInstance::from_json(SAMPLE).unwrap();
        let plan = RoutePlan { routes: vec![schedule_route(VehicleId(2), &[WaypointId(1), WaypointId(2)], &inst).unwrap()] };
        let text = plan.to_json();
        assert!(text.contains("\"pickup_time\""));
        let back = RoutePlan::from_json(&text, &inst).unwrap();
        assert_eq!(back, plan);
        assert!(validate_solution(&back, &inst).is_empty());
    }
}
