//! DBSCAN over geographic points with a haversine metric.
//!
//! `epsilon` is a central angle in radians (meters divided by
//! [`METERS_PER_RADIAN`](crate::geo::METERS_PER_RADIAN)). Points that
//! classical DBSCAN would call noise are returned as singleton clusters, so
//! every point always carries a label. With `min_samples = 1` the result is
//! exactly the connected components of the epsilon-neighborhood graph.
//!
//! Seeds are expanded in ascending point index and labels are renumbered by
//! first occurrence, so label vectors are reproducible for a fixed input
//! order.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::geo::{haversine_distance, GeoPoint, METERS_PER_RADIAN};

/// Inputs up to this size are scanned pairwise; larger ones use a grid.
pub const BRUTE_FORCE_LIMIT: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DbscanError {
    #[error("no points to cluster")]
    EmptyInput,
    #[error("point index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("min_samples must be at least 1")]
    InvalidMinSamples,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    /// Neighborhood radius in radians.
    pub epsilon: f64,
    pub min_samples: usize,
}

impl DbscanParams {
    pub fn new(epsilon: f64, min_samples: usize) -> Result<Self, DbscanError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(DbscanError::InvalidEpsilon(epsilon));
        }
        if min_samples == 0 {
            return Err(DbscanError::InvalidMinSamples);
        }
        Ok(DbscanParams { epsilon, min_samples })
    }

    /// `min_samples = 1`: plain connected components.
    pub fn connected(epsilon: f64) -> Result<Self, DbscanError> {
        Self::new(epsilon, 1)
    }
}

/// One label per input point, contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    count: usize,
}

impl ClusterLabels {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_count(&self) -> usize {
        self.count
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn max_cluster_size(&self) -> usize {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    pub fn average_cluster_size(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.labels.len() as f64 / self.count as f64
        }
    }

    /// Member indices per cluster, each list ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Indices `j` (the center included) with
/// `haversine(points[center], points[j]) <= epsilon * METERS_PER_RADIAN`,
/// ascending.
pub fn region_query(points: &[GeoPoint], center: usize, epsilon: f64) -> Result<Vec<usize>, DbscanError> {
    let c = *points.get(center).ok_or(DbscanError::IndexOutOfRange { index: center, len: points.len() })?;
    let limit = epsilon * METERS_PER_RADIAN;
    Ok((0..points.len()).filter(|&j| j == center || haversine_distance(c, points[j]) <= limit).collect())
}

pub fn dbscan(points: &[GeoPoint], params: DbscanParams) -> Result<ClusterLabels, DbscanError> {
    let prepared = PreparedPoints::new(points);
    dbscan_prepared(&prepared, params)
}

/// Points with their unit vectors precomputed, reusable across many
/// clusterings of the same set.
#[derive(Debug, Clone)]
pub struct PreparedPoints {
    points: Vec<GeoPoint>,
    units: Vec<[f64; 3]>,
}

impl PreparedPoints {
    pub fn new(points: &[GeoPoint]) -> Self {
        PreparedPoints { points: points.to_vec(), units: points.iter().map(GeoPoint::unit_vector).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }
}

pub fn dbscan_prepared(points: &PreparedPoints, params: DbscanParams) -> Result<ClusterLabels, DbscanError> {
    DbscanParams::new(params.epsilon, params.min_samples)?;
    if points.is_empty() {
        return Err(DbscanError::EmptyInput);
    }
    let index = if points.len() <= BRUTE_FORCE_LIMIT {
        NeighborIndex::brute(points, params.epsilon)
    } else {
        NeighborIndex::grid(points, params.epsilon)
    };
    match &index {
        NeighborIndex::Brute(t) if params.min_samples == 1 => Ok(connected_brute(points, *t)),
        _ => run(points, params, &index),
    }
}

/// With `min_samples == 1` every point is a core point and clusters are the
/// connected components of the ε-graph. Each expansion only scans points not
/// yet claimed, which drains quickly at large radii.
fn connected_brute(points: &PreparedPoints, t: Threshold) -> ClusterLabels {
    let n = points.len();
    let mut labels = vec![UNSET; n];
    let mut unclaimed: Vec<usize> = (0..n).collect();
    let mut stack = Vec::new();
    let mut next = 0;
    for seed in 0..n {
        if labels[seed] != UNSET {
            continue;
        }
        labels[seed] = next;
        stack.push(seed);
        while let Some(j) = stack.pop() {
            unclaimed.retain(|&k| {
                if labels[k] != UNSET {
                    return false;
                }
                if t.within(points, j, k) {
                    labels[k] = next;
                    stack.push(k);
                    return false;
                }
                true
            });
        }
        next += 1;
    }
    canonical(labels, next)
}

const UNSET: usize = usize::MAX;
const NOISE: usize = usize::MAX - 1;

fn run(points: &PreparedPoints, params: DbscanParams, index: &NeighborIndex) -> Result<ClusterLabels, DbscanError> {
    let n = points.len();
    let mut labels = vec![UNSET; n];
    let mut next = 0usize;
    let mut nbrs = Vec::new();
    let mut frontier = VecDeque::new();

    for seed in 0..n {
        if labels[seed] != UNSET {
            continue;
        }
        index.neighbors(points, seed, &mut nbrs);
        if nbrs.len() < params.min_samples {
            labels[seed] = NOISE;
            continue;
        }
        let cluster = next;
        next += 1;
        labels[seed] = cluster;
        claim(&nbrs, cluster, &mut labels, &mut frontier);
        while let Some(j) = frontier.pop_front() {
            index.neighbors(points, j, &mut nbrs);
            if nbrs.len() >= params.min_samples {
                claim(&nbrs, cluster, &mut labels, &mut frontier);
            }
        }
    }
    for l in labels.iter_mut().filter(|l| **l == NOISE) {
        *l = next;
        next += 1;
    }
    Ok(canonical(labels, next))
}

fn claim(nbrs: &[usize], cluster: usize, labels: &mut [usize], frontier: &mut VecDeque<usize>) {
    for &k in nbrs {
        match labels[k] {
            UNSET => {
                labels[k] = cluster;
                frontier.push_back(k);
            }
            NOISE => labels[k] = cluster,
            _ => {}
        }
    }
}

/// Renumbers labels by order of first appearance.
fn canonical(labels: Vec<usize>, count: usize) -> ClusterLabels {
    let mut map = vec![UNSET; count];
    let mut next = 0;
    let labels = labels
        .into_iter()
        .map(|l| {
            if map[l] == UNSET {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    ClusterLabels { labels, count }
}

/// Neighborhood lookups. The unit-vector chord is monotone in the central
/// angle, so it decides all pairs except those within a thin band around
/// the threshold, which fall back to the exact haversine comparison.
enum NeighborIndex {
    Brute(Threshold),
    Grid { threshold: Threshold, cell: f64, cells: HashMap<[i64; 3], Vec<usize>> },
}

#[derive(Clone, Copy)]
struct Threshold {
    epsilon: f64,
    lo: f64,
    hi: f64,
}

impl Threshold {
    fn new(epsilon: f64) -> Self {
        let chord = 2.0 * (epsilon.min(std::f64::consts::PI) / 2.0).sin();
        let sq = chord * chord;
        Threshold { epsilon, lo: sq * (1.0 - 1e-6), hi: sq * (1.0 + 1e-6) }
    }

    fn chord(&self) -> f64 {
        self.hi.sqrt()
    }

    #[inline]
    fn within(&self, points: &PreparedPoints, a: usize, b: usize) -> bool {
        let (u, v) = (&points.units[a], &points.units[b]);
        let d = [u[0] - v[0], u[1] - v[1], u[2] - v[2]];
        let sq = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if sq < self.lo {
            true
        } else if sq > self.hi {
            false
        } else {
            haversine_distance(points.points[a], points.points[b]) <= self.epsilon * METERS_PER_RADIAN
        }
    }
}

impl NeighborIndex {
    fn brute(_points: &PreparedPoints, epsilon: f64) -> Self {
        NeighborIndex::Brute(Threshold::new(epsilon))
    }

    fn grid(points: &PreparedPoints, epsilon: f64) -> Self {
        let threshold = Threshold::new(epsilon);
        let cell = threshold.chord().max(1e-12);
        let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, u) in points.units.iter().enumerate() {
            cells.entry(cell_of(u, cell)).or_default().push(i);
        }
        NeighborIndex::Grid { threshold, cell, cells }
    }

    fn neighbors(&self, points: &PreparedPoints, center: usize, out: &mut Vec<usize>) {
        out.clear();
        match self {
            NeighborIndex::Brute(t) => {
                out.extend((0..points.len()).filter(|&j| j == center || t.within(points, center, j)));
            }
            NeighborIndex::Grid { threshold, cell, cells } => {
                let c = cell_of(&points.units[center], *cell);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(members) = cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                                out.extend(
                                    members.iter().copied().filter(|&j| j == center || threshold.within(points, center, j)),
                                );
                            }
                        }
                    }
                }
                out.sort_unstable();
            }
        }
    }
}

fn cell_of(u: &[f64; 3], cell: f64) -> [i64; 3] {
    [(u[0] / cell).floor() as i64, (u[1] / cell).floor() as i64, (u[2] / cell).floor() as i64]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::meters_to_radians;
    use crate::model::fixtures::{east_of, north_of};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const HK: GeoPoint = GeoPoint::new(22.3, 114.2);

    fn eps(m: f64) -> f64 {
        meters_to_radians(m).unwrap()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, box_m: f64) -> Vec<GeoPoint> {
        (0..n)
            .map(|_| north_of(east_of(HK, rng.random_range(0.0..box_m)), rng.random_range(0.0..box_m)))
            .collect()
    }

    /// Union-find over every pair within range; independent of the
    /// expansion order and of the neighbor index.
    fn components(points: &[GeoPoint], radius_m: f64) -> Vec<Vec<usize>> {
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let n = points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in i + 1..n {
                if haversine_distance(points[i], points[j]) <= radius_m {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        normalize(groups.into_values().collect())
    }

    fn normalize(mut parts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        for p in &mut parts {
            p.sort_unstable();
        }
        parts.sort();
        parts
    }

    #[test]
    fn region_query_single_point() {
        assert_eq!(region_query(&[HK], 0, eps(5.0)).unwrap(), vec![0]);
        assert_eq!(region_query(&[HK], 1, eps(5.0)), Err(DbscanError::IndexOutOfRange { index: 1, len: 1 }));
    }

    #[test]
    fn region_query_below_threshold() {
        let pts = [HK, north_of(HK, 500.0)];
        assert_eq!(region_query(&pts, 0, eps(400.0)).unwrap(), vec![0]);
        assert_eq!(region_query(&pts, 1, eps(400.0)).unwrap(), vec![1]);
    }

    #[test]
    fn region_query_matches_pairwise_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_points(&mut rng, 40, 2_000.0);
        for c in 0..pts.len() {
            let expected: Vec<usize> =
                (0..pts.len()).filter(|&j| haversine_distance(pts[c], pts[j]) <= 300.0).collect();
            assert_eq!(region_query(&pts, c, eps(300.0)).unwrap(), expected);
        }
    }

    #[test]
    fn chain_is_one_cluster() {
        let pts = [HK, north_of(HK, 50.0), north_of(HK, 100.0)];
        let labels = dbscan(&pts, DbscanParams::connected(eps(60.0)).unwrap()).unwrap();
        assert_eq!(labels.labels(), &[0, 0, 0]);
    }

    #[test]
    fn far_points_are_separate() {
        let pts = [HK, north_of(HK, 500.0)];
        let labels = dbscan(&pts, DbscanParams::connected(eps(100.0)).unwrap()).unwrap();
        assert_eq!(labels.labels(), &[0, 1]);
        assert_eq!(labels.cluster_count(), 2);
    }

    #[test]
    fn errors() {
        assert_eq!(dbscan(&[], DbscanParams::connected(0.1).unwrap()), Err(DbscanError::EmptyInput));
        assert!(DbscanParams::new(0.0, 1).is_err());
        assert!(DbscanParams::new(f64::NAN, 1).is_err());
        assert!(DbscanParams::new(0.1, 0).is_err());
    }

    #[test]
    fn matches_union_find_over_seeded_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let pts = random_points(&mut rng, 50, 3_000.0);
            let r = rng.random_range(50.0..600.0);
            let labels = dbscan(&pts, DbscanParams::connected(eps(r)).unwrap()).unwrap();
            assert_eq!(normalize(labels.clusters()), components(&pts, r));
        }
    }

    #[test]
    fn classical_noise_becomes_singletons() {
        // Three tight points and one loner; min_samples 3 makes the loner noise.
        let pts = [HK, north_of(HK, 10.0), north_of(HK, 20.0), north_of(HK, 5_000.0)];
        let labels = dbscan(&pts, DbscanParams::new(eps(15.0), 3).unwrap()).unwrap();
        // Only the middle point has three neighbors; the ends are border points.
        assert_eq!(labels.labels(), &[0, 0, 0, 1]);
        let labels = dbscan(&pts, DbscanParams::new(eps(15.0), 4).unwrap()).unwrap();
        assert_eq!(labels.labels(), &[0, 1, 2, 3]);
    }

    #[test]
    fn grid_and_brute_force_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &(n, r) in &[(300usize, 80.0), (500, 250.0), (400, 1.0), (200, 20_000.0)] {
            let pts = PreparedPoints::new(&random_points(&mut rng, n, 5_000.0));
            for min_samples in [1, 4] {
                let params = DbscanParams::new(eps(r), min_samples).unwrap();
                let brute = run(&pts, params, &NeighborIndex::brute(&pts, params.epsilon)).unwrap();
                let grid = run(&pts, params, &NeighborIndex::grid(&pts, params.epsilon)).unwrap();
                assert_eq!(brute, grid);
            }
        }
    }

    #[test]
    fn large_input_uses_grid_and_matches_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = random_points(&mut rng, BRUTE_FORCE_LIMIT + 500, 20_000.0);
        let labels = dbscan(&pts, DbscanParams::connected(eps(150.0)).unwrap()).unwrap();
        assert_eq!(normalize(labels.clusters()), components(&pts, 150.0));
    }

    fn partition_of(labels: &ClusterLabels, order: &[usize]) -> Vec<Vec<usize>> {
        normalize(labels.clusters().into_iter().map(|c| c.into_iter().map(|i| order[i]).collect()).collect())
    }

    fn refines(fine: &[Vec<usize>], coarse: &[Vec<usize>]) -> bool {
        fine.iter().all(|f| coarse.iter().any(|c| f.iter().all(|x| c.contains(x))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn partition_and_refinement(seed in any::<u64>(), r1 in 10.0f64..800.0, extra in 0.0f64..800.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = random_points(&mut rng, 60, 3_000.0);
            let fine = dbscan(&pts, DbscanParams::connected(eps(r1)).unwrap()).unwrap();
            let coarse = dbscan(&pts, DbscanParams::connected(eps(r1 + extra)).unwrap()).unwrap();
            prop_assert_eq!(fine.labels().len(), pts.len());
            prop_assert_eq!(fine.sizes().iter().sum::<usize>(), pts.len());
            prop_assert!(refines(&fine.clusters(), &coarse.clusters()));
        }

        #[test]
        fn shuffling_keeps_partition(seed in any::<u64>(), r in 10.0f64..800.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = random_points(&mut rng, 60, 3_000.0);
            let mut order: Vec<usize> = (0..pts.len()).collect();
            for i in (1..order.len()).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let shuffled: Vec<_> = order.iter().map(|&i| pts[i]).collect();
            let identity: Vec<usize> = (0..pts.len()).collect();
            let a = dbscan(&pts, DbscanParams::connected(eps(r)).unwrap()).unwrap();
            let b = dbscan(&shuffled, DbscanParams::connected(eps(r)).unwrap()).unwrap();
            prop_assert_eq!(partition_of(&a, &identity), partition_of(&b, &order));
        }
    }
}
