use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ProblemInstance, RoutePlan, Seconds, TravelModel, VehicleId, WaypointId};

use super::construct::scheduled;
use super::{DistanceMatrix, SolverParams};

/// Slack absorbing rounding drift between incremental deltas and a full
/// recomputation of the objective.
const DELTA_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    TwoOpt,
    IntraRelocate,
    InterRelocate,
    Swap,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    #[default]
    LocalOptimum,
    TimeLimit,
    SolutionLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    pub accepted_moves: u64,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub stop: StopReason,
}

/// Reported to observers after each accepted move.
pub struct AcceptedMove<'a> {
    pub kind: MoveKind,
    pub objective_before: f64,
    pub objective_after: f64,
    pub state: &'a SearchState<'a>,
}

/// The incumbent during local search. Node 0 is the depot, node `i` is
/// waypoint `i`.
pub struct SearchState<'a> {
    instance: &'a ProblemInstance,
    matrix: &'a DistanceMatrix,
    travel: TravelModel,
    start: Seconds,
    routes: Vec<Vec<usize>>,
    vehicles: Vec<VehicleId>,
    capacity: Vec<u32>,
    load: Vec<u32>,
    route_of: Vec<usize>,
    pos_of: Vec<usize>,
    demand: Vec<u32>,
    earliest: Vec<Seconds>,
    latest: Vec<Seconds>,
    service: Vec<Seconds>,
    objective: f64,
}

impl<'a> SearchState<'a> {
    fn new(plan: &RoutePlan, instance: &'a ProblemInstance, matrix: &'a DistanceMatrix) -> Self {
        let n = instance.waypoints().len();
        let mut demand = vec![0; n + 1];
        let mut earliest = vec![0; n + 1];
        let mut latest = vec![Seconds::MAX; n + 1];
        let mut service = vec![0; n + 1];
        for w in instance.waypoints() {
            let i = w.id.0 as usize;
            demand[i] = w.demand;
            earliest[i] = w.window.earliest;
            latest[i] = w.window.latest;
            service[i] = w.service_duration;
        }
        let mut routes: Vec<Vec<usize>> = plan
            .routes
            .iter()
            .map(|r| r.stops.iter().map(|s| s.waypoint.0 as usize).collect())
            .collect();
        let mut vehicles: Vec<VehicleId> = plan.routes.iter().map(|r| r.vehicle).collect();
        // Idle vehicles join as empty routes so stops can be moved onto them.
        let idle: Vec<VehicleId> =
            instance.vehicles().iter().map(|v| v.id).filter(|id| !vehicles.contains(id)).collect();
        for id in idle {
            vehicles.push(id);
            routes.push(Vec::new());
        }
        let capacity = vehicles
            .iter()
            .map(|&id| instance.vehicle(id).map_or(0, |v| v.capacity))
            .collect();
        let load = routes.iter().map(|r| r.iter().map(|&x| demand[x]).sum()).collect();
        let mut state = SearchState {
            instance,
            matrix,
            travel: *instance.travel(),
            start: instance.depot().pickup_window.earliest,
            routes,
            vehicles,
            capacity,
            load,
            route_of: vec![usize::MAX; n + 1],
            pos_of: vec![usize::MAX; n + 1],
            demand,
            earliest,
            latest,
            service,
            objective: 0.0,
        };
        for r in 0..state.routes.len() {
            state.reindex(r);
        }
        state.objective = (0..state.routes.len()).map(|r| state.route_cost(r)).sum();
        state
    }

    /// Objective as tracked incrementally, in meters.
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// Materializes the incumbent as a scheduled plan. Routes emptied by the
    /// search are dropped.
    pub fn to_plan(&self) -> RoutePlan {
        let routes = self
            .routes
            .iter()
            .zip(&self.vehicles)
            .filter(|(r, _)| !r.is_empty())
            .map(|(r, &v)| scheduled(v, &ids(r), self.instance))
            .collect();
        RoutePlan { routes }
    }

    #[inline]
    fn d(&self, a: usize, b: usize) -> f64 {
        self.matrix.get(a, b)
    }

    /// Node at `i` in route `r`, with the depot standing in past either end.
    #[inline]
    fn at(&self, r: usize, i: isize) -> usize {
        let route = &self.routes[r];
        if i < 0 || i as usize >= route.len() {
            0
        } else {
            route[i as usize]
        }
    }

    fn route_cost(&self, r: usize) -> f64 {
        let route = &self.routes[r];
        let mut prev = 0;
        let mut total = 0.0;
        for &x in route {
            total += self.d(prev, x);
            prev = x;
        }
        total + self.d(prev, 0)
    }

    fn reindex(&mut self, r: usize) {
        for (p, &x) in self.routes[r].iter().enumerate() {
            self.route_of[x] = r;
            self.pos_of[x] = p;
        }
    }

    /// Whether the sequence can be served within every window when leaving
    /// the depot at the earliest pickup time.
    fn time_feasible(&self, nodes: impl IntoIterator<Item = usize>) -> bool {
        let mut clock = self.start;
        let mut prev = 0;
        for x in nodes {
            clock += self.travel.travel_time(self.d(prev, x));
            let begin = clock.max(self.earliest[x]);
            if begin > self.latest[x] {
                return false;
            }
            clock = begin + self.service[x];
            prev = x;
        }
        true
    }

    fn check_route(&self, r: usize) {
        let stops = ids(&self.routes[r]);
        assert!(self.load[r] <= self.capacity[r], "route {r} over capacity");
        assert!(
            crate::model::schedule_route(self.vehicles[r], &stops, self.instance).is_ok(),
            "route {r} violates a time window"
        );
    }
}

fn ids(route: &[usize]) -> Vec<WaypointId> {
    route.iter().map(|&x| WaypointId(x as u32)).collect()
}

/// A candidate improving move, already checked for feasibility.
#[derive(Debug, Clone, Copy)]
enum Move {
    TwoOpt { r: usize, i: usize, j: usize },
    Relocate { from: usize, i: usize, to: usize, p: usize },
    Swap { a: usize, i: usize, b: usize, j: usize },
}

struct Search<'s, 'a> {
    state: &'s mut SearchState<'a>,
    threshold: f64,
    deadline: Instant,
    solution_limit: u64,
    accepted: u64,
    stop: Option<StopReason>,
}

impl Search<'_, '_> {
    fn out_of_budget(&mut self) -> bool {
        if self.stop.is_none() && Instant::now() >= self.deadline {
            self.stop = Some(StopReason::TimeLimit);
        }
        self.stop.is_some()
    }

    fn improving(&self, delta: f64) -> bool {
        delta <= -self.threshold
    }

    fn best_two_opt(&self, x: usize) -> Option<(Move, f64)> {
        let s = &*self.state;
        let r = s.route_of[x];
        let route = &s.routes[r];
        let i = s.pos_of[x];
        let a = s.at(r, i as isize - 1);
        for j in i + 1..route.len() {
            let c = route[j];
            let e = s.at(r, j as isize + 1);
            let delta = s.d(a, c) + s.d(x, e) - s.d(a, x) - s.d(c, e);
            if self.improving(delta) {
                let seq = route[..i].iter().chain(route[i..=j].iter().rev()).chain(&route[j + 1..]);
                if s.time_feasible(seq.copied()) {
                    return Some((Move::TwoOpt { r, i, j }, delta));
                }
            }
        }
        None
    }

    fn best_intra_relocate(&self, x: usize) -> Option<(Move, f64)> {
        let s = &*self.state;
        let r = s.route_of[x];
        let route = &s.routes[r];
        let i = s.pos_of[x];
        let prev = s.at(r, i as isize - 1);
        let next = s.at(r, i as isize + 1);
        let removal = s.d(prev, next) - s.d(prev, x) - s.d(x, next);
        // Positions index the route with x taken out.
        let reduced = |k: usize| -> usize {
            let k = if k >= i { k + 1 } else { k };
            route.get(k).copied().unwrap_or(0)
        };
        for p in 0..route.len() {
            if p == i {
                continue;
            }
            let u = if p == 0 { 0 } else { reduced(p - 1) };
            let v = reduced(p);
            let delta = removal + s.d(u, x) + s.d(x, v) - s.d(u, v);
            if self.improving(delta) {
                let mut seq: Vec<usize> = route.iter().copied().filter(|&y| y != x).collect();
                seq.insert(p, x);
                if s.time_feasible(seq) {
                    return Some((Move::Relocate { from: r, i, to: r, p }, delta));
                }
            }
        }
        None
    }

    fn best_inter_relocate(&self, x: usize, offset: usize) -> Option<(Move, f64)> {
        let s = &*self.state;
        let a = s.route_of[x];
        let i = s.pos_of[x];
        let prev = s.at(a, i as isize - 1);
        let next = s.at(a, i as isize + 1);
        let removal = s.d(prev, next) - s.d(prev, x) - s.d(x, next);
        let m = s.routes.len();
        for step in 0..m {
            let b = (offset + step) % m;
            if b == a || s.load[b] + s.demand[x] > s.capacity[b] {
                continue;
            }
            let target = &s.routes[b];
            for p in 0..=target.len() {
                let u = s.at(b, p as isize - 1);
                let v = s.at(b, p as isize);
                let delta = removal + s.d(u, x) + s.d(x, v) - s.d(u, v);
                if self.improving(delta) {
                    let seq = target[..p].iter().chain(std::iter::once(&x)).chain(&target[p..]);
                    let source = s.routes[a].iter().filter(|&&y| y != x);
                    if s.time_feasible(seq.copied()) && s.time_feasible(source.copied()) {
                        return Some((Move::Relocate { from: a, i, to: b, p }, delta));
                    }
                }
            }
        }
        None
    }

    fn best_swap(&self, x: usize, offset: usize) -> Option<(Move, f64)> {
        let s = &*self.state;
        let a = s.route_of[x];
        let i = s.pos_of[x];
        let xp = s.at(a, i as isize - 1);
        let xn = s.at(a, i as isize + 1);
        let m = s.routes.len();
        for step in 0..m {
            let b = (offset + step) % m;
            if b == a {
                continue;
            }
            let target = &s.routes[b];
            for (j, &y) in target.iter().enumerate() {
                if s.load[a] - s.demand[x] + s.demand[y] > s.capacity[a]
                    || s.load[b] - s.demand[y] + s.demand[x] > s.capacity[b]
                {
                    continue;
                }
                let yp = s.at(b, j as isize - 1);
                let yn = s.at(b, j as isize + 1);
                let delta = s.d(xp, y) + s.d(y, xn) - s.d(xp, x) - s.d(x, xn) + s.d(yp, x) + s.d(x, yn)
                    - s.d(yp, y)
                    - s.d(y, yn);
                if self.improving(delta) {
                    let sa = s.routes[a].iter().map(|&z| if z == x { y } else { z });
                    let sb = target.iter().map(|&z| if z == y { x } else { z });
                    if s.time_feasible(sa) && s.time_feasible(sb) {
                        return Some((Move::Swap { a, i, b, j }, delta));
                    }
                }
            }
        }
        None
    }

    fn apply(&mut self, mv: Move, delta: f64) -> MoveKind {
        let s = &mut *self.state;
        let kind = match mv {
            Move::TwoOpt { r, i, j } => {
                s.routes[r][i..=j].reverse();
                s.reindex(r);
                MoveKind::TwoOpt
            }
            Move::Relocate { from, i, to, p } => {
                let x = s.routes[from].remove(i);
                s.routes[to].insert(p, x);
                s.load[from] -= s.demand[x];
                s.load[to] += s.demand[x];
                s.reindex(from);
                s.reindex(to);
                if from == to {
                    MoveKind::IntraRelocate
                } else {
                    MoveKind::InterRelocate
                }
            }
            Move::Swap { a, i, b, j } => {
                let (x, y) = (s.routes[a][i], s.routes[b][j]);
                s.routes[a][i] = y;
                s.routes[b][j] = x;
                s.load[a] = s.load[a] - s.demand[x] + s.demand[y];
                s.load[b] = s.load[b] - s.demand[y] + s.demand[x];
                s.reindex(a);
                s.reindex(b);
                MoveKind::Swap
            }
        };
        s.objective += delta;
        if cfg!(debug_assertions) {
            match mv {
                Move::TwoOpt { r, .. } => s.check_route(r),
                Move::Relocate { from, to, .. } => {
                    s.check_route(from);
                    s.check_route(to);
                }
                Move::Swap { a, b, .. } => {
                    s.check_route(a);
                    s.check_route(b);
                }
            }
        }
        kind
    }
}

/// First-improvement descent over 2-opt, relocate, and swap neighborhoods.
/// The input plan must be feasible; the output is feasible and never worse.
pub fn local_search(
    plan: &RoutePlan,
    instance: &ProblemInstance,
    matrix: &DistanceMatrix,
    params: &SolverParams,
) -> (RoutePlan, SearchStats) {
    local_search_observed(plan, instance, matrix, params, &mut |_| {})
}

/// [`local_search`] with a callback invoked after every accepted move.
pub fn local_search_observed(
    plan: &RoutePlan,
    instance: &ProblemInstance,
    matrix: &DistanceMatrix,
    params: &SolverParams,
    observer: &mut dyn FnMut(&AcceptedMove<'_>),
) -> (RoutePlan, SearchStats) {
    let deadline = Instant::now() + Duration::from_millis(params.time_limit_ms);
    let mut state = SearchState::new(plan, instance, matrix);
    let initial_objective = state.objective;
    let n = instance.waypoints().len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut search = Search {
        state: &mut state,
        threshold: params.optimization_step + DELTA_SLACK,
        deadline,
        solution_limit: params.solution_limit,
        accepted: 0,
        stop: None,
    };

    'descent: while n > 0 && search.solution_limit > 0 {
        let node_offset = rng.random_range(0..n);
        let route_offset = rng.random_range(0..search.state.routes.len().max(1));
        let mut improved = false;
        for step in 0..n {
            if search.out_of_budget() {
                break 'descent;
            }
            let x = (node_offset + step) % n + 1;
            if search.state.route_of[x] == usize::MAX {
                continue;
            }
            let found = search
                .best_two_opt(x)
                .or_else(|| search.best_intra_relocate(x))
                .or_else(|| search.best_inter_relocate(x, route_offset))
                .or_else(|| search.best_swap(x, route_offset));
            if let Some((mv, delta)) = found {
                let before = search.state.objective;
                let kind = search.apply(mv, delta);
                search.accepted += 1;
                improved = true;
                observer(&AcceptedMove {
                    kind,
                    objective_before: before,
                    objective_after: search.state.objective,
                    state: search.state,
                });
                if search.accepted >= search.solution_limit {
                    search.stop = Some(StopReason::SolutionLimit);
                    break 'descent;
                }
            }
        }
        if !improved {
            break;
        }
    }

    let stats = SearchStats {
        accepted_moves: search.accepted,
        initial_objective,
        final_objective: search.state.objective,
        stop: search.stop.unwrap_or_default(),
    };
    (state.to_plan(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::model::fixtures::*;
    use crate::model::{evaluate_objective, schedule_route, validate_solution};
    use crate::solver::{build_matrix, path_cheapest_arc};

    const HK: GeoPoint = GeoPoint::new(22.3, 114.2);

    fn plan_of(inst: &ProblemInstance, routes: &[&[u32]]) -> RoutePlan {
        let routes = routes
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let ids: Vec<_> = r.iter().map(|&i| WaypointId(i)).collect();
                schedule_route(VehicleId(k as u32 + 1), &ids, inst).unwrap()
            })
            .collect();
        RoutePlan { routes }
    }

    fn objective(plan: &RoutePlan, inst: &ProblemInstance) -> f64 {
        evaluate_objective(plan, inst).unwrap()
    }

    #[test]
    fn removes_planted_crossing() {
        // Four points on a line visited out of order: 1, 3, 2, 4.
        let pts: Vec<_> = (1..=4).map(|k| east_of(HK, 1_000.0 * k as f64)).collect();
        let inst = instance(HK, &pts, 1, 30);
        let plan = plan_of(&inst, &[&[1, 3, 2, 4]]);
        let (out, stats) = local_search(&plan, &inst, &build_matrix(&inst), &SolverParams::default());
        assert!(objective(&out, &inst) < objective(&plan, &inst) - 1.0);
        assert_eq!(out.routes[0].stop_ids(), (1..=4).map(WaypointId).collect::<Vec<_>>());
        assert!(validate_solution(&out, &inst).is_empty());
        assert!((stats.final_objective - objective(&out, &inst)).abs() < 1e-6);
    }

    #[test]
    fn moves_stops_between_routes() {
        // Two routes each holding a stop that belongs with the other.
        let east: Vec<_> = (1..=3).map(|k| east_of(HK, 2_000.0 * k as f64)).collect();
        let north: Vec<_> = (1..=3).map(|k| north_of(HK, 2_000.0 * k as f64)).collect();
        let pts: Vec<_> = east.iter().chain(&north).copied().collect();
        let inst = instance(HK, &pts, 2, 30);
        let plan = plan_of(&inst, &[&[1, 2, 6], &[4, 5, 3]]);
        let (out, _) = local_search(&plan, &inst, &build_matrix(&inst), &SolverParams::default());
        assert!(validate_solution(&out, &inst).is_empty());
        assert!(objective(&out, &inst) < objective(&plan, &inst) * 0.8);
    }

    /// Every ordering of every assignment for up to four stops.
    fn brute_force(inst: &ProblemInstance) -> f64 {
        let n = inst.waypoints().len() as u32;
        let m = inst.vehicles().len();
        let mut best = f64::INFINITY;
        let total = (m as u64).pow(n);
        for code in 0..total {
            let mut groups = vec![vec![]; m];
            let mut c = code;
            for id in 1..=n {
                groups[(c % m as u64) as usize].push(id);
                c /= m as u64;
            }
            let mut cost = 0.0;
            for (k, g) in groups.iter().enumerate() {
                let load: u32 = g.iter().map(|&i| inst.waypoint(WaypointId(i)).unwrap().demand).sum();
                if load > inst.vehicles()[k].capacity {
                    cost = f64::INFINITY;
                    break;
                }
                let mut best_route = f64::INFINITY;
                permute(&mut g.clone(), 0, &mut |p| {
                    let ids: Vec<_> = p.iter().map(|&i| WaypointId(i)).collect();
                    if let Ok(r) = schedule_route(VehicleId(k as u32 + 1), &ids, inst) {
                        best_route = best_route.min(objective(&RoutePlan { routes: vec![r] }, inst));
                    }
                });
                cost += best_route;
            }
            best = best.min(cost);
        }
        best
    }

    fn permute(v: &mut Vec<u32>, k: usize, f: &mut dyn FnMut(&[u32])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn optimal_plans_are_left_alone() {
        let pts = [north_of(HK, 1_000.0), north_of(HK, 2_500.0), east_of(HK, 1_500.0), east_of(HK, 4_000.0)];
        let inst = instance(HK, &pts, 2, 2);
        let best = brute_force(&inst);
        let plan = plan_of(&inst, &[&[1, 2], &[3, 4]]);
        assert!((objective(&plan, &inst) - best).abs() < 1e-6);
        let (out, stats) = local_search(&plan, &inst, &build_matrix(&inst), &SolverParams::default());
        assert_eq!(out, plan);
        assert_eq!(stats.accepted_moves, 0);
        assert_eq!(stats.stop, StopReason::LocalOptimum);
    }

    #[test]
    fn one_millisecond_budget_is_honored() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<_> = (0..600)
            .map(|_| GeoPoint::new(22.2 + rng.random_range(0.0..0.4), 113.9 + rng.random_range(0.0..0.5)))
            .collect();
        let inst = instance(GeoPoint::new(22.4, 114.15), &pts, 60, 30);
        let matrix = build_matrix(&inst);
        let plan = path_cheapest_arc(&inst, &matrix).unwrap();
        let params = SolverParams { time_limit_ms: 1, ..SolverParams::default() };
        let t = Instant::now();
        let (out, stats) = local_search(&plan, &inst, &matrix, &params);
        assert!(t.elapsed() < Duration::from_millis(50), "took {:?}", t.elapsed());
        assert_eq!(stats.stop, StopReason::TimeLimit);
        assert!(validate_solution(&out, &inst).is_empty());
    }

    #[test]
    fn solution_limit_caps_accepted_moves() {
        let pts: Vec<_> = [4, 1, 3, 2, 5].iter().map(|&k| east_of(HK, 1_000.0 * k as f64)).collect();
        let inst = instance(HK, &pts, 1, 30);
        let plan = plan_of(&inst, &[&[1, 2, 3, 4, 5]]);
        let params = SolverParams { solution_limit: 1, ..SolverParams::default() };
        let (_, stats) = local_search(&plan, &inst, &build_matrix(&inst), &params);
        assert_eq!(stats.accepted_moves, 1);
        assert_eq!(stats.stop, StopReason::SolutionLimit);
    }

    #[test]
    fn observer_sees_strict_decreases() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<_> = (0..60)
            .map(|_| north_of(east_of(HK, rng.random_range(-5e3..5e3)), rng.random_range(-5e3..5e3)))
            .collect();
        let inst = instance(HK, &pts, 6, 12);
        let matrix = build_matrix(&inst);
        let plan = path_cheapest_arc(&inst, &matrix).unwrap();
        let mut last = objective(&plan, &inst);
        let mut seen = 0;
        let (out, stats) = local_search_observed(&plan, &inst, &matrix, &SolverParams::default(), &mut |mv| {
            let materialized = mv.state.to_plan();
            let now = objective(&materialized, &inst);
            assert!(last - now >= 1.0, "{:?} improved by only {}", mv.kind, last - now);
            assert!((now - mv.objective_after).abs() < 1e-6);
            assert!(validate_solution(&materialized, &inst).is_empty());
            last = now;
            seen += 1;
        });
        assert!(seen > 0);
        assert_eq!(seen, stats.accepted_moves);
        assert!((objective(&out, &inst) - last).abs() < 1e-9);
    }

    #[test]
    fn same_seed_same_plan() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pts: Vec<_> = (0..80)
            .map(|_| north_of(east_of(HK, rng.random_range(-5e3..5e3)), rng.random_range(-5e3..5e3)))
            .collect();
        let inst = instance(HK, &pts, 8, 12);
        let matrix = build_matrix(&inst);
        let plan = path_cheapest_arc(&inst, &matrix).unwrap();
        let params = SolverParams { rng_seed: 99, ..SolverParams::default() };
        let (a, sa) = local_search(&plan, &inst, &matrix, &params);
        let (b, sb) = local_search(&plan, &inst, &matrix, &params);
        assert_eq!(sa.stop, StopReason::LocalOptimum);
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    fn windowed_instance(seed: u64, n: usize) -> ProblemInstance {
        use crate::model::{Depot, TimeWindow, TravelModel, Vehicle, Waypoint};
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waypoints = (1..=n as u32)
            .map(|id| {
                let start = rng.random_range(0..6 * 3_600);
                Waypoint {
                    id: WaypointId(id),
                    location: north_of(east_of(HK, rng.random_range(-8e3..8e3)), rng.random_range(-8e3..8e3)),
                    demand: rng.random_range(1..=5),
                    window: TimeWindow::new(start, start + rng.random_range(1_800..4 * 3_600)).unwrap(),
                    service_duration: rng.random_range(0..300),
                }
            })
            .collect();
        ProblemInstance::new(
            Depot { location: HK, pickup_window: TimeWindow::new(0, 12 * 3_600).unwrap() },
            waypoints,
            (1..=n as u32).map(|k| Vehicle { id: VehicleId(k), capacity: 15 }).collect(),
            TravelModel::new(10.0).unwrap(),
        )
        .unwrap()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn search_keeps_feasibility_and_never_worsens(seed in 0u64..10_000, n in 1usize..40) {
            let inst = windowed_instance(seed, n);
            let matrix = build_matrix(&inst);
            let plan = path_cheapest_arc(&inst, &matrix).unwrap();
            let params = SolverParams { rng_seed: seed, ..SolverParams::default() };
            let (out, _) = local_search(&plan, &inst, &matrix, &params);
            proptest::prop_assert!(validate_solution(&out, &inst).is_empty());
            proptest::prop_assert!(objective(&out, &inst) <= objective(&plan, &inst) + 1e-9);
        }
    }
}
