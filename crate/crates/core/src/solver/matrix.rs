use crate::geo::haversine_distance;
use crate::model::ProblemInstance;

/// Pairwise driven distances over the depot (node 0) and waypoints
/// (node `id`). Column 0 is zero: returning to the depot is free.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Number of nodes, depot included.
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.size + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.data[from * self.size..(from + 1) * self.size]
    }

    /// Bytes held by a matrix over `nodes` nodes.
    pub fn footprint(nodes: usize) -> usize {
        nodes * nodes * std::mem::size_of::<f64>()
    }
}

pub fn build_matrix(instance: &ProblemInstance) -> DistanceMatrix {
    let locations: Vec<_> = std::iter::once(instance.depot().location)
        .chain(instance.waypoints().iter().map(|w| w.location))
        .collect();
    let size = locations.len();
    let mut data = vec![0.0; size * size];
    for i in 0..size {
        for j in i + 1..size {
            // haversine_distance is exactly symmetric, so one evaluation
            // serves both directions.
            let d = haversine_distance(locations[i], locations[j]);
            data[i * size + j] = d;
            if i != 0 {
                data[j * size + i] = d;
            }
        }
    }
    if !instance.travel().open_routes {
        for j in 1..size {
            data[j * size] = data[j];
        }
    }
    DistanceMatrix { size, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::model::fixtures::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const HK: GeoPoint = GeoPoint::new(22.3, 114.2);

    #[test]
    fn single_waypoint() {
        let inst = instance(HK, &[north_of(HK, 1_000.0)], 1, 30);
        let m = build_matrix(&inst);
        assert_eq!(m.size(), 2);
        assert!((m.get(0, 1) - 1_000.0).abs() < 1e-6);
        assert_eq!((m.get(0, 0), m.get(1, 0), m.get(1, 1)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn matches_pairwise_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..10)
            .map(|_| GeoPoint::new(22.2 + rng.random_range(0.0..0.4), 113.9 + rng.random_range(0.0..0.5)))
            .collect();
        let inst = instance(HK, &pts, 2, 30);
        let m = build_matrix(&inst);
        let all: Vec<_> = std::iter::once(HK).chain(pts.iter().copied()).collect();
        for i in 0..all.len() {
            for j in 0..all.len() {
                let expected = if j == 0 { 0.0 } else { haversine_distance(all[i], all[j]) };
                assert_eq!(m.get(i, j), expected, "({i}, {j})");
                if i > 0 && j > 0 {
                    assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
        assert_eq!(m.row(0)[3], m.get(0, 3));
    }
}
