use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use route_forge::bench::{self, BenchConfig, GeneratorConfig, RunStatus, WindowStyle};
use route_forge::clusterer::{recursive_dbscan, ClusterConfig};
use route_forge::model::{validate_solution, ProblemInstance, RoutePlan};
use route_forge::pipeline::{run_strategy, Strategy};
use route_forge::solver::SolverParams;

#[derive(Parser)]
#[command(name = "route-forge", version, about = "Vehicle routing with time windows, split up by recursive DBSCAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and write the plan.
    Solve(SolveArgs),
    /// Cluster an instance's waypoints and print the clusters as JSON.
    Cluster(ClusterArgs),
    /// Run the benchmark grid and write the results CSV.
    Bench(BenchArgs),
    /// Check a plan against an instance.
    Validate(ValidateArgs),
    /// Write a synthetic instance.
    Generate(GenerateArgs),
}

/// JSON file with optional `cluster` and `solver` sections. Flags given on
/// the command line win.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    cluster: ClusterConfig,
    solver: SolverParams,
}

#[derive(Args)]
struct Tuning {
    /// JSON config file with `cluster` and `solver` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    time_limit_ms: Option<u64>,
    #[arg(long)]
    solution_limit: Option<u64>,
    #[arg(long)]
    optimization_step: Option<f64>,
    #[arg(long)]
    max_cluster_size: Option<usize>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    #[arg(long)]
    min_no_clusters: Option<usize>,
    /// Meters.
    #[arg(long)]
    min_radius: Option<u32>,
    /// Meters.
    #[arg(long)]
    max_radius: Option<u32>,
}

impl Tuning {
    fn resolve(&self) -> Result<(ClusterConfig, SolverParams)> {
        let file = match &self.config {
            Some(path) => serde_json::from_str::<ConfigFile>(&read(path)?)
                .with_context(|| format!("{}: bad config", path.display()))?,
            None => ConfigFile::default(),
        };
        let mut cluster = file.cluster;
        let mut solver = file.solver;
        set(&mut solver.time_limit_ms, self.time_limit_ms);
        set(&mut solver.solution_limit, self.solution_limit);
        set(&mut solver.optimization_step, self.optimization_step);
        set(&mut cluster.max_cluster_size, self.max_cluster_size);
        set(&mut cluster.min_cluster_size, self.min_cluster_size);
        set(&mut cluster.min_radius, self.min_radius);
        set(&mut cluster.max_radius, self.max_radius);
        if self.min_no_clusters.is_some() {
            cluster.min_no_clusters = self.min_no_clusters;
        }
        cluster.validate()?;
        solver.validate()?;
        Ok((cluster, solver))
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "recursive-dbscan")]
    strategy: Strategy,
    /// Seeds the local search scan order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plan JSON destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    geojson: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct ClusterArgs {
    instance: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Clone, Copy, ValueEnum)]
enum Windows {
    Wide,
    Mixed,
}

impl From<Windows> for WindowStyle {
    fn from(w: Windows) -> Self {
        match w {
            Windows::Wide => WindowStyle::Wide,
            Windows::Mixed => WindowStyle::Mixed,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Sizes 500..=5000 step 500, 15 repetitions.
    #[arg(long)]
    full: bool,
    #[arg(long, value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vehicle capacity.
    #[arg(long, default_value_t = 30)]
    capacity: u32,
    #[arg(long, value_enum, default_value = "mixed")]
    windows: Windows,
    #[arg(long, default_value_t = 4096)]
    memory_budget_mb: u64,
    /// Wall-clock budget per run, in seconds.
    #[arg(long)]
    time_budget_s: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, short, default_value = "results.csv")]
    out: PathBuf,
    /// Re-validate every archived plan after the run.
    #[arg(long)]
    verify: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    plan: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    capacity: u32,
    #[arg(long)]
    fleet: Option<usize>,
    #[arg(long, value_enum, default_value = "mixed")]
    windows: Windows,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn load_instance(path: &Path) -> Result<ProblemInstance> {
    ProblemInstance::from_json(&read(path)?).with_context(|| format!("{}: bad instance", path.display()))
}

#[derive(Serialize)]
struct ClusterDump {
    members: Vec<u32>,
    radius: u32,
    depth: u32,
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let (cluster, mut solver) = args.tuning.resolve()?;
    solver.rng_seed = args.seed;
    match run_strategy(&instance, args.strategy, &cluster, &solver) {
        Ok(result) => {
            eprintln!(
                "{}: {:.0} m, {} vehicles, {} clusters, {:.3} s",
                args.strategy,
                result.total_distance,
                result.busy_vehicle_count,
                result.cluster_count,
                result.wall_time.as_secs_f64()
            );
            write_or_print(args.out.as_deref(), &result.plan.to_json())?;
            if let Some(path) = &args.geojson {
                bench::export_geojson(&result.plan, &instance, path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(failure) if failure.error.is_no_solution() => {
            eprintln!("{failure}");
            Ok(ExitCode::from(1))
        }
        Err(failure) => Err(failure.into()),
    }
}

fn cluster(args: ClusterArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let (config, _) = args.tuning.resolve()?;
    let points: Vec<_> = instance.waypoints().iter().map(|w| w.location).collect();
    let set = match recursive_dbscan(&points, &config) {
        Ok(set) => set,
        Err(e) => {
            eprintln!("{e}");
            return Ok(ExitCode::from(1));
        }
    };
    let dump: Vec<ClusterDump> = set
        .clusters
        .iter()
        .map(|c| ClusterDump {
            members: c.members.iter().map(|&i| instance.waypoints()[i].id.0).collect(),
            radius: c.radius,
            depth: c.depth,
        })
        .collect();
    eprintln!("{} clusters, largest {}", set.len(), set.peak_size());
    write_or_print(args.out.as_deref(), &serde_json::to_string_pretty(&dump)?)?;
    Ok(ExitCode::SUCCESS)
}

fn run_bench(args: BenchArgs) -> Result<ExitCode> {
    let (cluster, solver) = args.tuning.resolve()?;
    let base = if args.full { BenchConfig::full() } else { BenchConfig::default() };
    let config = BenchConfig {
        sizes: args.sizes.unwrap_or(base.sizes),
        repetitions: args.reps.unwrap_or(base.repetitions),
        strategies: args.strategies.unwrap_or(base.strategies),
        base_seed: args.seed,
        generator: GeneratorConfig {
            vehicle_capacity: args.capacity,
            window_style: args.windows.into(),
            ..GeneratorConfig::default()
        },
        cluster,
        solver,
        memory_budget_bytes: args.memory_budget_mb << 20,
        time_budget: args.time_budget_s.map(Duration::from_secs_f64),
        threads: args.threads,
    };
    let run = bench::run_benchmark(&config);
    bench::export_csv(&run.records, &args.out)?;
    let ok = run.records.iter().filter(|r| r.status == RunStatus::Ok).count();
    eprintln!("{ok}/{} runs OK, results in {}", run.records.len(), args.out.display());
    if args.verify {
        let issues = bench::verify(&run, &config);
        for issue in &issues {
            eprintln!("record {}: {}", issue.record, issue.reason);
        }
        if !issues.is_empty() {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let plan = RoutePlan::from_json(&read(&args.plan)?, &instance)
        .with_context(|| format!("{}: bad plan", args.plan.display()))?;
    let violations = validate_solution(&plan, &instance);
    let mut out = io::stdout().lock();
    for v in &violations {
        if writeln!(out, "{v}").is_err() {
            break;
        }
    }
    if violations.is_empty() {
        eprintln!("plan is feasible");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} violation(s)", violations.len());
        Ok(ExitCode::from(1))
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    anyhow::ensure!(args.n >= 1, "need at least one waypoint");
    let config = GeneratorConfig {
        vehicle_capacity: args.capacity,
        fleet_size: args.fleet,
        window_style: args.windows.into(),
        ..GeneratorConfig::new(args.n, args.seed)
    };
    anyhow::ensure!(config.demand_range.1 <= args.capacity, "capacity must be at least {}", config.demand_range.1);
    write_or_print(args.out.as_deref(), &bench::generate_instance(&config).to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Cluster(a) => cluster(a),
        Command::Bench(a) => run_bench(a),
        Command::Validate(a) => validate(a),
        Command::Generate(a) => generate(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
