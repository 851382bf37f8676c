//! Timing probes for the initialization steps and the phases of the main
//! loop, one report per grid/tentacle case.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use tentacle_nav::heuristics::select_best;
use tentacle_nav::sim::{check_collision, sense_rays, step_robot, Navigator, Planner};
use tentacle_nav::{extract_support_priority, sample_tentacles, RobotCenteredGrid};

use crate::benchmark::{generate_map, map_seed, trial_scenario};
use crate::config::{Config, MapSpec, TimingCase};
use crate::error::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub label: String,
    pub d_v: f64,
    pub n_v: u32,
    pub voxels: u64,
    pub tentacles: usize,
    pub records: usize,
    pub active_voxels: usize,
    /// Median over the configured repetitions, seconds.
    pub array_init_s: f64,
    /// Tentacle sampling plus voxel extraction, fastest repetition, seconds.
    pub tentacle_init_s: f64,
    pub map_update_ms: f64,
    pub occupancy_heuristics_ms: f64,
    pub selection_ms: f64,
    pub next_pose_ms: f64,
    /// Sum of the four phase means.
    pub total_ms: f64,
    pub cycles: u32,
    /// Times the probe scenario ended and was restarted.
    pub restarts: u32,
}

impl TimingReport {
    /// Mean main-loop rate, Hz.
    pub fn loop_rate_hz(&self) -> f64 {
        1000.0 / self.total_ms
    }
}

/// Scheduling noise only adds time, so the minimum is the least noisy estimate.
fn fastest(samples: &[f64]) -> f64 {
    samples.iter().copied().fold(f64::INFINITY, f64::min)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median wall time of allocating and filling the grid arrays.
///
/// Grids stay alive until every repetition is done so that each one gets
/// fresh pages from the OS instead of reusing a freed heap block. A sample
/// that still lands in recycled memory is an outlier, hence the median.
pub fn time_array_init(cfg: &Config, repeats: u32) -> Result<f64, BenchError> {
    let grid_cfg = cfg.grid_config();
    let mut samples = Vec::with_capacity(repeats as usize);
    let mut live = Vec::with_capacity(repeats as usize);
    for _ in 0..repeats {
        let start = Instant::now();
        let grid = RobotCenteredGrid::new(grid_cfg)?;
        samples.push(start.elapsed().as_secs_f64());
        live.push(std::hint::black_box(grid));
    }
    drop(live);
    Ok(median(samples))
}

/// Measures one case. The main loop runs closed-loop through a forest,
/// restarting whenever the scenario ends; warm-up cycles are discarded.
pub fn time_case(base: &Config, case: &TimingCase) -> Result<TimingReport, BenchError> {
    let cfg = base.with_timing_case(case);
    cfg.validate()?;
    let t = &cfg.timing;
    let array_init_s = time_array_init(&cfg, t.init_repeats)?;

    let params = cfg.navigation_params();
    let range = cfg.sensor_range();
    let mut samples = Vec::with_capacity(t.init_repeats as usize);
    let mut built = None;
    for _ in 0..t.init_repeats {
        let start = Instant::now();
        let tentacles = sample_tentacles(&params.tentacles, |d| range.along(d))?;
        let voxels = extract_support_priority(&tentacles, &params.tentacles, &params.grid)?;
        samples.push(start.elapsed().as_secs_f64());
        built = Some((tentacles, voxels));
    }
    let tentacle_init_s = fastest(&samples);
    let (tentacles, voxels) = built.expect("at least one repetition");
    let records = voxels.total_records();
    let planner = Arc::new(Planner::from_parts(params, tentacles, voxels)?);

    let spec = MapSpec::default();
    let seed = map_seed(cfg.seed, 0, &spec);
    let world = generate_map(&spec, seed, &cfg)?;
    let scenario = trial_scenario(&cfg, &spec, &world, seed);
    let rays = scenario.sensor.ray_directions();
    let goal = scenario.goals[0];
    let dt = params.control.period;
    let max_steps = (scenario.time_limit / dt).ceil() as u32;

    let mut nav = Navigator::new(planner.clone())?;
    let mut pose = scenario.start;
    let mut steps = 0u32;
    let mut restarts = 0u32;
    let mut sums = [0f64; 4];
    let total = t.warmup_cycles + t.cycles;
    for i in 0..total {
        let arrived = (pose.position - goal).norm() <= scenario.tolerance;
        if arrived || steps >= max_steps || check_collision(&world, &pose, &scenario.robot) {
            nav = Navigator::new(planner.clone())?;
            pose = scenario.start;
            steps = 0;
            restarts += 1;
        }
        let cloud = sense_rays(&world, &pose, &scenario.sensor, &rays, 0.0);

        let t0 = Instant::now();
        nav.update_map(&cloud, &pose);
        let t1 = Instant::now();
        let evaluation = nav.evaluate(&pose, &goal);
        let t2 = Instant::now();
        let best = select_best(&evaluation.rows);
        let t3 = Instant::now();
        let goal_robot = pose.inverse_transform_point(&goal);
        let cmd = nav.next_pose(&evaluation, best, &goal_robot);
        let t4 = Instant::now();

        if i >= t.warmup_cycles {
            for (sum, (a, b)) in sums.iter_mut().zip([(t0, t1), (t1, t2), (t2, t3), (t3, t4)]) {
                *sum += (b - a).as_secs_f64();
            }
        }
        pose = step_robot(&pose, &cmd, &scenario.robot, dt);
        steps += 1;
    }

    let ms = |s: f64| s * 1000.0 / f64::from(t.cycles);
    let [map_update_ms, occupancy_heuristics_ms, selection_ms, next_pose_ms] = sums.map(ms);
    Ok(TimingReport {
        label: case.label.clone(),
        d_v: case.d_v,
        n_v: case.n_v,
        voxels: planner.params().grid.voxel_count(),
        tentacles: planner.tentacles().len(),
        records,
        active_voxels: planner.active_voxels().len(),
        array_init_s,
        tentacle_init_s,
        map_update_ms,
        occupancy_heuristics_ms,
        selection_ms,
        next_pose_ms,
        total_ms: map_update_ms + occupancy_heuristics_ms + selection_ms + next_pose_ms,
        cycles: t.cycles,
        restarts,
    })
}

/// Runs every configured case serially.
pub fn run_timing(cfg: &Config) -> Result<Vec<TimingReport>, BenchError> {
    cfg.validate()?;
    cfg.timing.cases.iter().map(|case| time_case(cfg, case)).collect()
}

pub const TIMING_HEADER: &str = "label,d_v,n_v,voxels,tentacles,records,active_voxels,array_init_s,tentacle_init_s,\
map_update_ms,occupancy_heuristics_ms,selection_ms,next_pose_ms,total_ms,cycles";

pub fn write_timing_csv<W: std::io::Write>(reports: &[TimingReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TIMING_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{:.6},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            r.label,
            r.d_v,
            r.n_v,
            r.voxels,
            r.tentacles,
            r.records,
            r.active_voxels,
            r.array_init_s,
            r.tentacle_init_s,
            r.map_update_ms,
            r.occupancy_heuristics_ms,
            r.selection_ms,
            r.next_pose_ms,
            r.total_ms,
            r.cycles
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fastest_and_median() {
        assert_eq!(fastest(&[3.0, 1.0, 2.0]), 1.0);
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_case_reports_consistent_phases() {
        let mut cfg = Config::default();
        cfg.offline.l_t_max = 4.0;
        cfg.sensor.rho_x = 4.0;
        cfg.sensor.rho_y = 4.0;
        cfg.sensor.rho_z = 4.0;
        cfg.sensor.d_s = 3.0;
        cfg.timing.cycles = 5;
        let case = TimingCase { label: "tiny".into(), d_v: 0.25, n_v: 40, n_phi: 5, n_theta: 3 };
        let r = time_case(&cfg, &case).unwrap();
        assert_eq!(r.tentacles, 15);
        assert_eq!(r.voxels, 64_000);
        let sum = r.map_update_ms + r.occupancy_heuristics_ms + r.selection_ms + r.next_pose_ms;
        assert!((r.total_ms - sum).abs() < 1e-12);
        assert!(r.array_init_s >= 0.0 && r.tentacle_init_s >= 0.0 && r.selection_ms >= 0.0);
    }
}
