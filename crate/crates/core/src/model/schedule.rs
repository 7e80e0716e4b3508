use thiserror::Error;

use super::{Node, ProblemInstance, Route, Seconds, StopVisit, TimeWindow, VehicleId, WaypointId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("unknown waypoint {0}")]
    UnknownWaypoint(WaypointId),
    #[error("pickup time {pickup} outside depot window {window}")]
    DepotWindow { pickup: Seconds, window: TimeWindow },
    #[error("infeasible sequence: service at waypoint {waypoint} would start at {service_start}, after its latest {latest}")]
    InfeasibleSequence { waypoint: WaypointId, service_start: Seconds, latest: Seconds },
}

/// Fills arrival and departure times along a fixed stop sequence, leaving the
/// depot at `pickup_time`.
///
/// A vehicle that arrives early waits; service starts at
/// `max(arrival, earliest)` and must not start after `latest`.
pub fn propagate_schedule(
    vehicle: VehicleId,
    pickup_time: Seconds,
    stops: &[WaypointId],
    instance: &ProblemInstance,
) -> Result<Route, ScheduleError> {
    let window = instance.depot().pickup_window;
    if !window.contains(pickup_time) {
        return Err(ScheduleError::DepotWindow { pickup: pickup_time, window });
    }
    let mut visits = Vec::with_capacity(stops.len());
    let mut prev = Node::Depot;
    let mut clock = pickup_time;
    for &id in stops {
        let w = instance.waypoint(id).ok_or(ScheduleError::UnknownWaypoint(id))?;
        let node = Node::Waypoint(id);
        let arrival = clock + instance.arc_time(prev, node).map_err(|_| ScheduleError::UnknownWaypoint(id))?;
        let start = arrival.max(w.window.earliest);
        if start > w.window.latest {
            return Err(ScheduleError::InfeasibleSequence { waypoint: id, service_start: start, latest: w.window.latest });
        }
        let departure = start + w.service_duration;
        visits.push(StopVisit { waypoint: id, arrival, departure });
        prev = node;
        clock = departure;
    }
    Ok(Route { vehicle, pickup_time, stops: visits })
}

/// Schedules a sequence with the vehicle leaving at the depot's earliest
/// pickup time. Leaving later can only delay every stop, so if this start
/// fails no other pickup time succeeds.
pub fn schedule_route(
    vehicle: VehicleId,
    stops: &[WaypointId],
    instance: &ProblemInstance,
) -> Result<Route, ScheduleError> {
    propagate_schedule(vehicle, instance.depot().pickup_window.earliest, stops, instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{haversine_distance, GeoPoint};
    use crate::model::fixtures::*;
    use crate::model::{Depot, TravelModel, Vehicle, Waypoint};

    const ORIGIN: GeoPoint = GeoPoint::new(22.3, 114.2);

    fn build(points: &[(f64, (i64, i64), i64)], depot_window: (i64, i64)) -> ProblemInstance {
        let waypoints = points
            .iter()
            .enumerate()
            .map(|(i, &(north, (e, l), service))| Waypoint {
                id: WaypointId(i as u32 + 1),
                location: north_of(ORIGIN, north),
                demand: 1,
                window: TimeWindow::new(e, l).unwrap(),
                service_duration: service,
            })
            .collect();
        ProblemInstance::new(
            Depot { location: ORIGIN, pickup_window: TimeWindow::new(depot_window.0, depot_window.1).unwrap() },
            waypoints,
            vec![Vehicle { id: VehicleId(1), capacity: 30 }],
            TravelModel::new(10.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_stop_arrival_is_pickup_plus_travel() {
        // 6,000 m at 10 m/s is 600 s.
        let inst = build(&[(6_000.0, (100, 10_100), 0)], (100, 200));
        let route = schedule_route(VehicleId(1), &[WaypointId(1)], &inst).unwrap();
        assert_eq!(route.pickup_time, 100);
        assert_eq!(route.stops[0].arrival, 700);
        assert_eq!(route.stops[0].departure, 700);
    }

    #[test]
    fn window_closed_before_reachable() {
        let inst = build(&[(6_000.0, (0, 500), 0)], (0, 10));
        let err = schedule_route(VehicleId(1), &[WaypointId(1)], &inst).unwrap_err();
        assert_eq!(err, ScheduleError::InfeasibleSequence { waypoint: WaypointId(1), service_start: 600, latest: 500 });
    }

    #[test]
    fn pickup_outside_depot_window() {
        let inst = build(&[(10.0, (0, 500), 0)], (0, 10));
        assert!(matches!(
            propagate_schedule(VehicleId(1), 11, &[WaypointId(1)], &inst),
            Err(ScheduleError::DepotWindow { .. })
        ));
    }

    /// Step-by-step simulation written independently of the production
    /// recurrence: an explicit clock with separate drive, wait, and serve
    /// phases.
    fn simulate(inst: &ProblemInstance, pickup: i64, stops: &[u32]) -> Vec<(i64, i64)> {
        let mut clock = pickup;
        let mut here = inst.depot().location;
        let mut out = vec![];
        for &s in stops {
            let w = &inst.waypoints()[s as usize - 1];
            let drive = (haversine_distance(here, w.location) / inst.travel().speed_mps).round() as i64;
            clock += drive;
            let arrival = clock;
            while clock < w.window.earliest {
                clock += 1;
            }
            assert!(clock <= w.window.latest);
            clock += w.service_duration;
            out.push((arrival, clock));
            here = w.location;
        }
        out
    }

    #[test]
    fn mid_route_wait_matches_simulator() {
        // Stop 2 opens long after the vehicle can reach it.
        let inst = build(
            &[(1_000.0, (0, 5_000), 60), (3_000.0, (2_000, 6_000), 120), (3_500.0, (0, 9_000), 30)],
            (0, 100),
        );
        let ids = [WaypointId(1), WaypointId(2), WaypointId(3)];
        let route = schedule_route(VehicleId(1), &ids, &inst).unwrap();
        let expected = simulate(&inst, 0, &[1, 2, 3]);
        let got: Vec<_> = route.stops.iter().map(|s| (s.arrival, s.departure)).collect();
        assert_eq!(got, expected);
        assert!(route.stops[1].arrival < 2_000);
        assert_eq!(route.stops[1].departure, 2_000 + 120);
    }

    #[test]
    fn propagation_is_idempotent() {
        let inst = build(&[(1_000.0, (0, 5_000), 60), (3_000.0, (2_000, 6_000), 120)], (0, 100));
        let once = propagate_schedule(VehicleId(1), 40, &[WaypointId(2), WaypointId(1)], &inst).unwrap();
        let twice = propagate_schedule(once.vehicle, once.pickup_time, &once.stop_ids(), &inst).unwrap();
        assert_eq!(once, twice);
    }
}
