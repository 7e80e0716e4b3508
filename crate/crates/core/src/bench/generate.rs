use rand::{Rng, SeedableRng};
use rand::distr::weighted::WeightedIndex;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::model::{Depot, ProblemInstance, Seconds, TimeWindow, TravelModel, Vehicle, VehicleId, Waypoint, WaypointId};

const HOUR: Seconds = 3_600;

/// A latitude/longitude box in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

impl Region {
    /// 0.4° × 0.5° around Hong Kong.
    pub const HONG_KONG: Region = Region { min_lat: 22.2, max_lat: 22.6, min_lon: 113.9, max_lon: 114.4 };

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat) && (self.min_lon..=self.max_lon).contains(&p.lon)
    }

    fn clamp(&self, p: GeoPoint) -> GeoPoint {
        GeoPoint::new(p.lat.clamp(self.min_lat, self.max_lat), p.lon.clamp(self.min_lon, self.max_lon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowStyle {
    /// Every waypoint accepts deliveries over the whole horizon.
    Wide,
    /// Random 2 to 6 hour windows inside the horizon.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_waypoints: usize,
    pub seed: u64,
    pub region: Region,
    /// Inclusive demand bounds.
    pub demand_range: (u32, u32),
    pub window_style: WindowStyle,
    /// Defaults to one vehicle per ten waypoints, rounded up.
    pub fleet_size: Option<usize>,
    pub vehicle_capacity: u32,
    pub horizon: Seconds,
    pub speed_mps: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_waypoints: 100,
            seed: 0,
            region: Region::HONG_KONG,
            demand_range: (1, 5),
            window_style: WindowStyle::Mixed,
            fleet_size: None,
            vehicle_capacity: 30,
            horizon: 12 * HOUR,
            speed_mps: 10.0,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n_waypoints: usize, seed: u64) -> Self {
        GeneratorConfig { n_waypoints, seed, ..GeneratorConfig::default() }
    }

    pub fn fleet(&self) -> usize {
        self.fleet_size.unwrap_or(self.n_waypoints.div_ceil(10).max(1))
    }
}

/// Demand `k` is drawn with weight `2^-(k - lo)`: most parcels are small,
/// a few fill a sixth of a van.
fn demand_weights(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| 0.5f64.powi((k - lo) as i32)).collect()
}

/// Seeded synthetic instance: waypoints from a mixture of 5 to 15 Gaussian
/// blobs, depot at the region's center.
pub fn generate_instance(config: &GeneratorConfig) -> ProblemInstance {
    assert!(config.n_waypoints >= 1, "at least one waypoint");
    let (lo, hi) = config.demand_range;
    assert!(1 <= lo && lo <= hi && hi <= config.vehicle_capacity, "demand range must fit the vehicles");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let region = config.region;
    let span_lat = region.max_lat - region.min_lat;
    let span_lon = region.max_lon - region.min_lon;

    let blob_count = rng.random_range(5..=15);
    let blobs: Vec<(GeoPoint, f64)> = (0..blob_count)
        .map(|_| {
            let center = GeoPoint::new(
                region.min_lat + span_lat * rng.random_range(0.1..0.9),
                region.min_lon + span_lon * rng.random_range(0.1..0.9),
            );
            (center, span_lat * rng.random_range(0.01..0.06))
        })
        .collect();
    let blob_weights: Vec<f64> = (0..blob_count).map(|_| rng.random_range(0.5..2.0)).collect();
    let pick_blob = WeightedIndex::new(&blob_weights).expect("positive weights");
    let pick_demand = WeightedIndex::new(demand_weights(lo, hi)).expect("positive weights");
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let waypoints = (1..=config.n_waypoints as u32)
        .map(|id| {
            let (center, sigma) = blobs[pick_blob.sample(&mut rng)];
            let location = region.clamp(GeoPoint::new(
                center.lat + sigma * unit.sample(&mut rng),
                center.lon + sigma * unit.sample(&mut rng),
            ));
            let demand = lo + pick_demand.sample(&mut rng) as u32;
            let window = match config.window_style {
                WindowStyle::Wide => TimeWindow::new(0, config.horizon),
                WindowStyle::Mixed => {
                    let len = rng.random_range(2 * HOUR..=6 * HOUR).min(config.horizon);
                    let start = rng.random_range(0..=config.horizon - len);
                    TimeWindow::new(start, start + len)
                }
            }
            .expect("window inside horizon");
            Waypoint { id: WaypointId(id), location, demand, window, service_duration: 0 }
        })
        .collect();

    let vehicles = (1..=config.fleet() as u32)
        .map(|k| Vehicle { id: VehicleId(k), capacity: config.vehicle_capacity })
        .collect();
    ProblemInstance::new(
        Depot { location: region.center(), pickup_window: TimeWindow::new(0, config.horizon).expect("horizon") },
        waypoints,
        vehicles,
        TravelModel::new(config.speed_mps).expect("positive speed"),
    )
    .expect("generated instance is valid")
}
