use std::path::Path;

use serde_json::{json, Value};

use crate::geo::GeoPoint;
use crate::model::{ProblemInstance, RoutePlan};

use super::BenchError;

fn position(p: GeoPoint) -> Value {
    json!([p.lon, p.lat])
}

fn feature(geometry: Value, properties: Value) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

/// A FeatureCollection with the depot, every waypoint, and one LineString
/// per route running from the depot through its stops.
pub fn geojson_value(plan: &RoutePlan, instance: &ProblemInstance) -> Value {
    let depot = instance.depot();
    let mut features = vec![feature(
        json!({ "type": "Point", "coordinates": position(depot.location) }),
        json!({
            "kind": "depot",
            "depot": true,
            "window": [depot.pickup_window.earliest, depot.pickup_window.latest],
        }),
    )];
    for w in instance.waypoints() {
        features.push(feature(
            json!({ "type": "Point", "coordinates": position(w.location) }),
            json!({
                "kind": "waypoint",
                "id": w.id,
                "demand": w.demand,
                "window": [w.window.earliest, w.window.latest],
            }),
        ));
    }
    for route in plan.routes.iter().filter(|r| !r.is_empty()) {
        let coordinates: Vec<Value> = std::iter::once(depot.location)
            .chain(route.stops.iter().filter_map(|s| instance.waypoint(s.waypoint).map(|w| w.location)))
            .map(position)
            .collect();
        features.push(feature(
            json!({ "type": "LineString", "coordinates": coordinates }),
            json!({
                "kind": "route",
                "vehicle": route.vehicle,
                "stops": route.stop_ids(),
                "pickup_time": route.pickup_time,
            }),
        ));
    }
    json!({ "type": "FeatureCollection", "features": features })
}

pub fn export_geojson(plan: &RoutePlan, instance: &ProblemInstance, path: &Path) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(&geojson_value(plan, instance)).expect("json values serialize");
    std::fs::write(path, text).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}
