//! Seeded experiment grid over instance sizes, repetitions and strategies,
//! with CSV and GeoJSON export.

mod generate;
mod geojson;
mod report;

pub use generate::{generate_instance, GeneratorConfig, Region, WindowStyle};
pub use geojson::{export_geojson, geojson_value};
pub use report::{export_csv, parse_csv, write_csv, CsvRow};

use std::path::PathBuf;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clusterer::ClusterConfig;
use crate::model::{evaluate_objective, validate_solution, RoutePlan};
use crate::pipeline::{run_strategy, Strategy};
use crate::solver::{DistanceMatrix, SolverParams};

/// Environment variable capping the number of benchmark worker threads.
pub const THREADS_ENV: &str = "ROUTE_FORGE_THREADS";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed results row {row}: {reason}")]
    Parse { row: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RunStatus {
    Ok,
    NoSolution,
    /// The run would exceed, or exceeded, its memory or time budget.
    CrashedBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n_waypoints: usize,
    pub strategy: Strategy,
    pub repetition: usize,
    pub seed: u64,
    pub runtime_s: f64,
    pub distance_m: Option<f64>,
    pub busy_vehicles: Option<usize>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub strategies: Vec<Strategy>,
    pub base_seed: u64,
    /// Template for every generated instance; size and seed are overridden.
    pub generator: GeneratorConfig,
    pub cluster: ClusterConfig,
    pub solver: SolverParams,
    pub memory_budget_bytes: u64,
    pub time_budget: Option<Duration>,
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![100, 250, 500, 1000],
            repetitions: 5,
            strategies: Strategy::ALL.to_vec(),
            base_seed: 0,
            generator: GeneratorConfig::default(),
            cluster: ClusterConfig::default(),
            solver: SolverParams::default(),
            memory_budget_bytes: 4 << 30,
            time_budget: None,
            threads: None,
        }
    }
}

impl BenchConfig {
    /// Sizes 500 to 5000 in steps of 500, fifteen repetitions each.
    pub fn full() -> Self {
        BenchConfig { sizes: (1..=10).map(|k| k * 500).collect(), repetitions: 15, ..BenchConfig::default() }
    }

    pub fn instance_config(&self, n: usize, repetition: usize) -> GeneratorConfig {
        GeneratorConfig { n_waypoints: n, seed: cell_seed(self.base_seed, n, repetition), ..self.generator }
    }
}

/// Seed for one (size, repetition) cell, independent of the rest of the grid.
pub fn cell_seed(base: u64, n: usize, repetition: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((n as u64) << 20) | repetition as u64);
    rng.next_u64()
}

/// Estimated peak bytes for one strategy on `n` waypoints: the largest
/// distance matrix plus per-node working state.
pub fn estimated_memory(n: usize, strategy: Strategy, cluster: &ClusterConfig) -> u64 {
    let nodes = match strategy {
        Strategy::Monolithic => n,
        Strategy::Dbscan | Strategy::RecursiveDbscan => n.min(cluster.max_cluster_size),
    };
    (DistanceMatrix::footprint(nodes + 1) + nodes * 256) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub records: Vec<BenchRecord>,
    /// Plan of each OK record, by record index.
    pub plans: Vec<Option<RoutePlan>>,
}

fn run_cell(config: &BenchConfig, n: usize, repetition: usize) -> Vec<(BenchRecord, Option<RoutePlan>)> {
    let gen = config.instance_config(n, repetition);
    let instance = generate_instance(&gen);
    config
        .strategies
        .iter()
        .map(|&strategy| {
            let mut record = BenchRecord {
                n_waypoints: n,
                strategy,
                repetition,
                seed: gen.seed,
                runtime_s: 0.0,
                distance_m: None,
                busy_vehicles: None,
                status: RunStatus::CrashedBudget,
            };
            if estimated_memory(n, strategy, &config.cluster) > config.memory_budget_bytes {
                return (record, None);
            }
            let params = SolverParams { rng_seed: gen.seed, ..config.solver };
            match run_strategy(&instance, strategy, &config.cluster, &params) {
                Ok(result) => {
                    record.runtime_s = result.wall_time.as_secs_f64();
                    if config.time_budget.is_some_and(|b| result.wall_time > b) {
                        return (record, None);
                    }
                    record.status = RunStatus::Ok;
                    record.distance_m = Some(result.total_distance);
                    record.busy_vehicles = Some(result.busy_vehicle_count);
                    (record, Some(result.plan))
                }
                Err(failure) => {
                    record.runtime_s = failure.wall_time.as_secs_f64();
                    record.status = RunStatus::NoSolution;
                    (record, None)
                }
            }
        })
        .collect()
}

fn thread_count(config: &BenchConfig) -> usize {
    let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&t| t > 0);
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    [config.threads, from_env].into_iter().flatten().fold(available, usize::min)
}

/// Runs every strategy on every (size, repetition) cell. Cells run in
/// parallel; strategies within a cell run one after another on the same
/// instance. Records come back ordered by size, repetition, then strategy.
pub fn run_benchmark(config: &BenchConfig) -> BenchRun {
    let cells: Vec<(usize, usize)> =
        config.sizes.iter().flat_map(|&n| (0..config.repetitions).map(move |r| (n, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(thread_count(config)).build().expect("thread pool");
    let results: Vec<_> = pool.install(|| cells.par_iter().map(|&(n, r)| run_cell(config, n, r)).collect());
    let (records, plans) = results.into_iter().flatten().unzip();
    BenchRun { records, plans }
}

/// A disagreement found while re-checking archived plans.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyIssue {
    pub record: usize,
    pub reason: String,
}

/// Regenerates each OK record's instance, re-validates its plan and
/// recomputes its distance.
pub fn verify(run: &BenchRun, config: &BenchConfig) -> Vec<VerifyIssue> {
    let mut issues = Vec::new();
    for (i, (record, plan)) in run.records.iter().zip(&run.plans).enumerate() {
        if record.status != RunStatus::Ok {
            continue;
        }
        let issue = |reason: String| VerifyIssue { record: i, reason };
        let Some(plan) = plan else {
            issues.push(issue("no archived plan".into()));
            continue;
        };
        let instance = generate_instance(&config.instance_config(record.n_waypoints, record.repetition));
        let violations = validate_solution(plan, &instance);
        if let Some(v) = violations.first() {
            issues.push(issue(format!("{} violation(s), first: {v}", violations.len())));
            continue;
        }
        let distance = evaluate_objective(plan, &instance).expect("validated plan");
        if record.distance_m.is_none_or(|d| (d - distance).abs() > 1e-6) {
            issues.push(issue(format!("recorded {:?} m, recomputed {distance} m", record.distance_m)));
        }
        if record.busy_vehicles != Some(plan.busy_vehicles().len()) {
            issues.push(issue("busy vehicle count mismatch".into()));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(sizes: Vec<usize>, reps: usize) -> BenchConfig {
        BenchConfig {
            sizes,
            repetitions: reps,
            cluster: ClusterConfig { max_cluster_size: 40, min_cluster_size: 5, ..ClusterConfig::default() },
            threads: Some(2),
            ..BenchConfig::default()
        }
    }

    #[test]
    fn record_count_is_grid_product() {
        let config = small(vec![30, 60], 2);
        let run = run_benchmark(&config);
        assert_eq!(run.records.len(), 2 * 2 * 3);
        assert_eq!(run.plans.len(), run.records.len());
        let keys: Vec<_> = run.records.iter().map(|r| (r.n_waypoints, r.repetition, r.strategy)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(verify(&run, &config).is_empty());
        assert!(run.records.iter().any(|r| r.status == RunStatus::Ok));
    }

    #[test]
    fn memory_budget_turns_runs_into_records() {
        let config = BenchConfig { memory_budget_bytes: 100_000, ..small(vec![200], 1) };
        let run = run_benchmark(&config);
        let status = |s| run.records.iter().find(|r| r.strategy == s).unwrap().status;
        // 201² × 8 bytes exceeds the budget, 41² × 8 does not.
        assert_eq!(status(Strategy::Monolithic), RunStatus::CrashedBudget);
        assert_ne!(status(Strategy::RecursiveDbscan), RunStatus::CrashedBudget);
        assert!(run.records.iter().all(|r| r.status != RunStatus::CrashedBudget || r.distance_m.is_none()));
    }

    #[test]
    fn memory_estimate() {
        let c = ClusterConfig::default();
        assert_eq!(estimated_memory(999, Strategy::Monolithic, &c), 1000 * 1000 * 8 + 999 * 256);
        assert_eq!(estimated_memory(5000, Strategy::RecursiveDbscan, &c), 501 * 501 * 8 + 500 * 256);
    }

    #[test]
    fn cell_seeds_are_distinct_and_stable() {
        let a = cell_seed(0, 500, 0);
        assert_eq!(a, cell_seed(0, 500, 0));
        assert_ne!(a, cell_seed(0, 500, 1));
        assert_ne!(a, cell_seed(0, 1000, 0));
        assert_ne!(a, cell_seed(1, 500, 0));
    }

    #[test]
    fn full_grid_shape() {
        let c = BenchConfig::full();
        assert_eq!(c.sizes.first(), Some(&500));
        assert_eq!(c.sizes.last(), Some(&5000));
        assert_eq!(c.sizes.len(), 10);
        assert_eq!(c.repetitions, 15);
    }
}
