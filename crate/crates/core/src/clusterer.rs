//! Radius search and recursive re-clustering on top of [`dbscan`](crate::dbscan).
//!
//! [`binary_search_clusters`] bisects an integer radius in meters, running
//! DBSCAN at every probe, and keeps the feasible clustering with the largest
//! average cluster size. Shrinking the radius can only split clusters, so
//! both feasibility tests used here are monotone in the radius and the
//! bisection converges on the boundary.
//!
//! [`recursive_dbscan`] searches with a minimum-cluster-count test and then
//! re-clusters every oversized cluster with a strictly smaller radius bound
//! until all clusters fit the size cap.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dbscan::{dbscan_prepared, ClusterLabels, DbscanParams, PreparedPoints};
use crate::geo::{centroid, haversine_distance, meters_to_radians, GeoPoint};

/// Deepest allowed re-clustering level.
pub const MAX_RECURSION_DEPTH: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("no feasible clustering found")]
    NoSolutionFound,
    #[error("re-clustering exceeded depth {0}")]
    RecursionLimit(u32),
    #[error("invalid cluster configuration: {0}")]
    InvalidConfig(String),
    #[error("no points to cluster")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Meters.
    pub min_radius: u32,
    /// Meters.
    pub max_radius: u32,
    pub max_cluster_size: usize,
    pub min_cluster_size: usize,
    /// `None` means `ceil(n / max_cluster_size)` for the point set at hand.
    pub min_no_clusters: Option<usize>,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { min_radius: 1, max_radius: 10_000, max_cluster_size: 500, min_cluster_size: 35, min_no_clusters: None }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.min_radius == 0 || self.min_radius > self.max_radius {
            return Err(ClusterError::InvalidConfig(format!(
                "need 0 < min_radius <= max_radius, got {} and {}",
                self.min_radius, self.max_radius
            )));
        }
        if self.min_cluster_size == 0 || self.min_cluster_size > self.max_cluster_size {
            return Err(ClusterError::InvalidConfig(format!(
                "need 0 < min_cluster_size <= max_cluster_size, got {} and {}",
                self.min_cluster_size, self.max_cluster_size
            )));
        }
        Ok(())
    }

    /// The smallest cluster count that could satisfy the size cap.
    pub fn default_min_clusters(&self, n: usize) -> usize {
        n.div_ceil(self.max_cluster_size).max(1)
    }
}

/// What makes a probed radius acceptable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// The largest cluster has at most `max_cluster_size` points.
    MaxSizeCap,
    /// There are at least `min_no_clusters` clusters.
    MinClusterCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    /// Indices into the clustered point list, ascending.
    pub members: Vec<usize>,
    /// Radius in meters of the clustering this cluster came from.
    pub radius: u32,
    /// Re-clustering depth; 0 for clusters found by the top-level search.
    pub depth: u32,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn lowest(&self) -> usize {
        self.members.first().copied().unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::len).collect()
    }

    pub fn peak_size(&self) -> usize {
        self.sizes().into_iter().max().unwrap_or(0)
    }

    /// True when the clusters are non-empty, disjoint, and cover `0..n`.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for c in &self.clusters {
            if c.is_empty() {
                return false;
            }
            for &m in &c.members {
                if m >= n || seen[m] {
                    return false;
                }
                seen[m] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn from_labels(labels: &ClusterLabels, radius: u32, depth: u32) -> Self {
        ClusterSet {
            clusters: labels.clusters().into_iter().map(|members| Cluster { members, radius, depth }).collect(),
        }
    }
}

/// One DBSCAN run made during a radius search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Probe {
    pub radius: u32,
    pub cluster_count: usize,
    pub max_cluster_size: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub clusters: ClusterSet,
    pub best_radius: u32,
    pub probes: Vec<Probe>,
}

impl SearchOutcome {
    pub fn average_cluster_size(&self) -> f64 {
        let n: usize = self.clusters.sizes().iter().sum();
        n as f64 / self.clusters.len() as f64
    }
}

/// Bisects the radius over `[config.min_radius, config.max_radius]`.
///
/// Infeasible probes move the upper bound to `radius - 1`, feasible ones
/// move the lower bound to `radius + 1`; the loop runs while the bounds have
/// not crossed. Among feasible probes the clustering with the strictly
/// largest average size wins (the earliest on ties).
pub fn binary_search_clusters(
    points: &[GeoPoint],
    config: &ClusterConfig,
    feasibility: Feasibility,
) -> Result<SearchOutcome, ClusterError> {
    config.validate()?;
    if points.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    let prepared = PreparedPoints::new(points);
    let min_clusters = config.min_no_clusters.unwrap_or_else(|| config.default_min_clusters(points.len()));
    search(&prepared, config.min_radius, config.max_radius, feasibility, config.max_cluster_size, min_clusters, 0)
}

fn search(
    points: &PreparedPoints,
    mut lo: u32,
    mut hi: u32,
    feasibility: Feasibility,
    max_cluster_size: usize,
    min_clusters: usize,
    depth: u32,
) -> Result<SearchOutcome, ClusterError> {
    let mut probes = Vec::new();
    let mut best: Option<(f64, ClusterLabels, u32)> = None;
    while lo <= hi && lo > 0 {
        let radius = lo + (hi - lo) / 2;
        let epsilon = meters_to_radians(f64::from(radius)).expect("radius is positive");
        let labels = dbscan_prepared(points, DbscanParams::connected(epsilon).expect("epsilon is positive"))
            .map_err(|_| ClusterError::EmptyInput)?;
        let max_size = labels.max_cluster_size();
        let feasible = match feasibility {
            Feasibility::MaxSizeCap => max_size <= max_cluster_size,
            Feasibility::MinClusterCount => labels.cluster_count() >= min_clusters,
        };
        probes.push(Probe { radius, cluster_count: labels.cluster_count(), max_cluster_size: max_size, feasible });
        if !feasible {
            hi = radius - 1;
        } else {
            lo = radius + 1;
            let avg = labels.average_cluster_size();
            if best.as_ref().is_none_or(|(b, _, _)| avg > *b) {
                best = Some((avg, labels, radius));
            }
        }
    }
    let (_, labels, best_radius) = best.ok_or(ClusterError::NoSolutionFound)?;
    Ok(SearchOutcome { clusters: ClusterSet::from_labels(&labels, best_radius, depth), best_radius, probes })
}

/// Clusters with a minimum-count search, then re-clusters every cluster
/// larger than `max_cluster_size` inside `[min_radius, best_radius - 1]`,
/// and finally folds clusters smaller than `min_cluster_size` into their
/// nearest neighbor when the cap allows.
///
/// The minimum cluster count is fixed once for the whole run, from
/// `min_no_clusters` or else `ceil(N / max_cluster_size)` over all `N`
/// points, and every level asks for at least that many clusters.
pub fn recursive_dbscan(points: &[GeoPoint], config: &ClusterConfig) -> Result<ClusterSet, ClusterError> {
    config.validate()?;
    if points.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    let all: Vec<usize> = (0..points.len()).collect();
    let min_clusters = config.min_no_clusters.unwrap_or_else(|| config.default_min_clusters(points.len()));
    let mut out = Vec::new();
    recurse(points, &all, config, config.max_radius, min_clusters, 0, &mut out)?;
    let mut set = ClusterSet { clusters: out };
    merge_small_clusters(&mut set, points, config);
    Ok(set)
}

fn recurse(
    points: &[GeoPoint],
    subset: &[usize],
    config: &ClusterConfig,
    max_radius: u32,
    min_clusters: usize,
    depth: u32,
    out: &mut Vec<Cluster>,
) -> Result<(), ClusterError> {
    if depth > MAX_RECURSION_DEPTH {
        return Err(ClusterError::RecursionLimit(MAX_RECURSION_DEPTH));
    }
    let local: Vec<GeoPoint> = subset.iter().map(|&i| points[i]).collect();
    let prepared = PreparedPoints::new(&local);
    let outcome = search(
        &prepared,
        config.min_radius,
        max_radius,
        Feasibility::MinClusterCount,
        config.max_cluster_size,
        min_clusters,
        depth,
    )?;
    for cluster in outcome.clusters.clusters {
        let members: Vec<usize> = cluster.members.iter().map(|&i| subset[i]).collect();
        if members.len() > config.max_cluster_size {
            let child_max = outcome.best_radius.saturating_sub(1);
            if child_max < config.min_radius {
                return Err(ClusterError::NoSolutionFound);
            }
            recurse(points, &members, config, child_max, min_clusters, depth + 1, out)?;
        } else {
            out.push(Cluster { members, radius: cluster.radius, depth });
        }
    }
    Ok(())
}

/// Folds undersized clusters into the cluster with the nearest centroid.
/// Candidates are taken smallest first (lowest member index on ties); a
/// candidate whose nearest neighbor has no room is left alone.
fn merge_small_clusters(set: &mut ClusterSet, points: &[GeoPoint], config: &ClusterConfig) {
    let centroid_of = |c: &Cluster| centroid(c.members.iter().map(|&i| points[i])).expect("clusters are non-empty");
    let mut centroids: Vec<GeoPoint> = set.clusters.iter().map(centroid_of).collect();
    let mut settled = vec![false; set.clusters.len()];
    loop {
        let candidate = (0..set.clusters.len())
            .filter(|&i| !settled[i] && set.clusters[i].len() < config.min_cluster_size)
            .min_by_key(|&i| (set.clusters[i].len(), set.clusters[i].lowest()));
        let Some(small) = candidate else { break };
        let nearest = (0..set.clusters.len()).filter(|&j| j != small).min_by(|&a, &b| {
            let da = haversine_distance(centroids[small], centroids[a]);
            let db = haversine_distance(centroids[small], centroids[b]);
            da.total_cmp(&db).then(set.clusters[a].lowest().cmp(&set.clusters[b].lowest()))
        });
        match nearest {
            Some(target) if set.clusters[target].len() + set.clusters[small].len() <= config.max_cluster_size => {
                let moved = std::mem::take(&mut set.clusters[small].members);
                let t = &mut set.clusters[target];
                t.members.extend(moved);
                t.members.sort_unstable();
                centroids[target] = centroid_of(t);
                set.clusters.remove(small);
                centroids.remove(small);
                settled.remove(small);
            }
            _ => settled[small] = true,
        }
    }
}

/// Processing order for clusters: largest first, then nearest centroid to
/// the depot, then lowest member index.
pub fn cluster_order(clusters: &ClusterSet, points: &[GeoPoint], depot: GeoPoint) -> Vec<usize> {
    let keyed: Vec<(usize, f64, usize)> = clusters
        .clusters
        .iter()
        .map(|c| {
            let d = centroid(c.members.iter().map(|&i| points[i])).map_or(f64::INFINITY, |p| haversine_distance(p, depot));
            (c.len(), d, c.lowest())
        })
        .collect();
    let mut order: Vec<usize> = (0..keyed.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, da, la) = keyed[a];
        let (sb, db, lb) = keyed[b];
        sb.cmp(&sa).then(da.total_cmp(&db)).then(la.cmp(&lb))
    });
    order
}
