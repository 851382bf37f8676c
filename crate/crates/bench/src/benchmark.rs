//! Multi-map, multi-trial benchmark runs.

use std::sync::Arc;

use nalgebra::{Vector2, Vector3};
use rayon::prelude::*;
use tentacle_nav::sim::{
    generate_cylinder_map, generate_forest_map, run_scenario_with, Bounds, CylinderMapParams, KeepOut, Outcome,
    Planner, ScenarioConfig, TraceRecord, WorldMap,
};
use tentacle_nav::Pose;

use crate::config::{Config, MapKind, MapSpec};
use crate::error::BenchError;

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of map `index`, unless the map spec fixes one.
pub fn map_seed(global: u64, index: usize, spec: &MapSpec) -> u64 {
    spec.seed.unwrap_or_else(|| mix(global ^ mix(index as u64 + 1)))
}

pub fn trial_seed(map_seed: u64, trial: usize) -> u64 {
    mix(map_seed ^ mix(((trial as u64) + 1) << 32))
}

/// Uniform offset in `[-half_width, half_width]` drawn from `seed`.
fn jitter(seed: u64, half_width: f64) -> f64 {
    let u = (mix(seed) >> 11) as f64 / (1u64 << 53) as f64;
    (2.0 * u - 1.0) * half_width
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrialOutcome {
    Success,
    Collision,
    Timeout,
    /// The scenario could not be set up (map generation or validation).
    Error,
}

impl TrialOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialOutcome::Success => "success",
            TrialOutcome::Collision => "collision",
            TrialOutcome::Timeout => "timeout",
            TrialOutcome::Error => "error",
        }
    }
}

impl From<Outcome> for TrialOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => TrialOutcome::Success,
            Outcome::Collision => TrialOutcome::Collision,
            Outcome::Timeout => TrialOutcome::Timeout,
        }
    }
}

/// Rounds to the 6 decimals written to disk, so aggregates computed here
/// match aggregates recomputed from the CSV.
pub fn round6(x: f64) -> f64 {
    format!("{x:.6}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub map: usize,
    pub trial: usize,
    pub seed: u64,
    pub outcome: TrialOutcome,
    pub duration_s: f64,
    pub path_length_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapAggregate {
    pub map: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful trials; `None` without any.
    pub duration_mean_s: Option<f64>,
    pub duration_std_s: Option<f64>,
    pub path_length_mean_m: Option<f64>,
    pub path_length_std_m: Option<f64>,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

/// Per-map aggregates for maps `0..map_count`.
pub fn aggregate(rows: &[TrialRow], map_count: usize) -> Vec<MapAggregate> {
    (0..map_count)
        .map(|m| {
            let rows: Vec<&TrialRow> = rows.iter().filter(|r| r.map == m).collect();
            let ok: Vec<&&TrialRow> = rows.iter().filter(|r| r.outcome == TrialOutcome::Success).collect();
            let durations: Vec<f64> = ok.iter().map(|r| r.duration_s).collect();
            let lengths: Vec<f64> = ok.iter().map(|r| r.path_length_m).collect();
            let d = mean_std(&durations);
            let l = mean_std(&lengths);
            MapAggregate {
                map: m,
                trials: rows.len(),
                successes: ok.len(),
                success_rate: if rows.is_empty() { 0.0 } else { ok.len() as f64 / rows.len() as f64 },
                duration_mean_s: d.map(|v| v.0),
                duration_std_s: d.map(|v| v.1),
                path_length_mean_m: l.map(|v| v.0),
                path_length_std_m: l.map(|v| v.1),
            }
        })
        .collect()
}

/// A generated benchmark map.
#[derive(Debug, Clone)]
pub struct BenchMap {
    pub spec: MapSpec,
    pub seed: u64,
    pub world: Result<WorldMap<f64>, String>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub seed: u64,
    pub tentacles: usize,
    pub voxels: u64,
    pub maps: Vec<BenchMap>,
    /// Ordered by (map, trial).
    pub rows: Vec<TrialRow>,
    pub traces: Vec<Vec<TraceRecord<f64>>>,
    pub aggregates: Vec<MapAggregate>,
}

impl BenchmarkRun {
    pub fn total_successes(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome == TrialOutcome::Success).count()
    }

    pub fn success_rate(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.total_successes() as f64 / self.rows.len() as f64
        }
    }
}

/// Generates the world of a map spec.
pub fn generate_map(spec: &MapSpec, seed: u64, cfg: &Config) -> tentacle_nav::Result<WorldMap<f64>> {
    match spec.kind {
        MapKind::Forest => generate_forest_map(spec.area, spec.density, seed),
        MapKind::Empty => Ok(WorldMap { seed, ..WorldMap::empty(Bounds::square(spec.area.sqrt())) }),
        MapKind::Cylinders => {
            let mut params = CylinderMapParams {
                count: spec.count as usize,
                clearance: cfg.robot_model().footprint_diagonal(),
                ..CylinderMapParams::default()
            };
            let (start, goals) = cylinder_route(params.side, 0.0, cfg.scenario.altitude);
            params.keep_out = std::iter::once(start.xy())
                .chain(goals.iter().map(|g| g.xy()))
                .map(|center| KeepOut { center, radius: 1.5 })
                .collect();
            generate_cylinder_map(seed, &params)
        }
    }
}

/// Start and goals across a cylinder field of side `side`: from one corner to
/// the opposite one, then along the far edge.
fn cylinder_route(side: f64, offset: f64, altitude: f64) -> (Vector3<f64>, Vec<Vector3<f64>>) {
    let start = Vector3::new(1.0, 1.0 + offset, altitude);
    let goals = vec![Vector3::new(side - 1.0, side - 1.0, altitude), Vector3::new(side - 1.0, 1.0, altitude)];
    (start, goals)
}

/// Scenario for one trial on `world`. Forest and empty maps are crossed
/// along x at mid height, starting and ending `standoff` outside the square.
pub fn trial_scenario(cfg: &Config, spec: &MapSpec, world: &WorldMap<f64>, trial_seed: u64) -> ScenarioConfig<f64> {
    let s = &cfg.scenario;
    let offset = jitter(trial_seed, s.trial_jitter);
    let (start, goals) = match spec.kind {
        MapKind::Forest | MapKind::Empty => {
            let size = world.bounds.size();
            let mid = world.bounds.min.y + size.y / 2.0 + offset;
            let start = Vector3::new(world.bounds.min.x - s.standoff, mid, s.altitude);
            let goal = Vector3::new(world.bounds.max.x + s.standoff, mid, s.altitude);
            (start, vec![goal])
        }
        MapKind::Cylinders => cylinder_route(world.bounds.size().x, offset, s.altitude),
    };
    let heading: Vector2<f64> = (goals[0] - start).xy();
    ScenarioConfig {
        world: world.clone(),
        start: Pose::from_position_yaw(start, heading.y.atan2(heading.x)),
        goals,
        tolerance: spec.epsilon.unwrap_or(s.epsilon),
        time_limit: spec.time_limit.unwrap_or(s.time_limit),
        robot: cfg.robot_model(),
        sensor: cfg.sensor_config(),
        navigation: cfg.navigation_params(),
    }
}

struct TrialResult {
    row: TrialRow,
    trace: Vec<TraceRecord<f64>>,
}

/// Runs every (map, trial) pair. Trials run in parallel; failures to set up
/// a scenario become `error` rows.
pub fn run_benchmark(cfg: &Config) -> Result<BenchmarkRun, BenchError> {
    cfg.validate()?;
    let planner = Arc::new(Planner::new(cfg.navigation_params(), cfg.sensor_range())?);
    run_benchmark_with(cfg, planner)
}

/// Same as [`run_benchmark`] with a prebuilt planner.
pub fn run_benchmark_with(cfg: &Config, planner: Arc<Planner<f64>>) -> Result<BenchmarkRun, BenchError> {
    let maps: Vec<BenchMap> = cfg
        .benchmark
        .maps
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let seed = map_seed(cfg.seed, i, spec);
            BenchMap { spec: spec.clone(), seed, world: generate_map(spec, seed, cfg).map_err(|e| e.to_string()) }
        })
        .collect();

    let jobs: Vec<(usize, usize)> = maps
        .iter()
        .enumerate()
        .flat_map(|(m, map)| {
            let trials = map.spec.trials.unwrap_or(cfg.benchmark.trials) as usize;
            (0..trials).map(move |t| (m, t))
        })
        .collect();

    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let map = &maps[m];
            let seed = trial_seed(map.seed, t);
            let run = map.world.as_ref().map_err(Clone::clone).and_then(|world| {
                let scenario = trial_scenario(cfg, &map.spec, world, seed);
                run_scenario_with(planner.clone(), &scenario).map_err(|e| e.to_string())
            });
            match run {
                Ok(result) => TrialResult {
                    row: TrialRow {
                        map: m,
                        trial: t,
                        seed,
                        outcome: result.outcome.into(),
                        duration_s: round6(result.duration),
                        path_length_m: round6(result.path_length),
                    },
                    trace: result.trace,
                },
                Err(_) => TrialResult {
                    row: TrialRow {
                        map: m,
                        trial: t,
                        seed,
                        outcome: TrialOutcome::Error,
                        duration_s: 0.0,
                        path_length_m: 0.0,
                    },
                    trace: Vec::new(),
                },
            }
        })
        .collect();

    let (rows, traces): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.row, r.trace)).unzip();
    let aggregates = aggregate(&rows, maps.len());
    Ok(BenchmarkRun {
        seed: cfg.seed,
        tentacles: planner.tentacles().len(),
        voxels: planner.params().grid.voxel_count(),
        maps,
        rows,
        traces,
        aggregates,
    })
}
