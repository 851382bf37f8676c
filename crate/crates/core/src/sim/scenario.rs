//! Closed-loop navigation: offline setup, the per-cycle pipeline and the
//! scenario runner with its pose trace.

use std::io::{self, BufRead, Write};
use std::sync::Arc;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::controller::{calculate_next_pose, ControlParams, ControlState, PoseCommand};
use crate::error::{Error, Result};
use crate::grid::{GridConfig, RobotCenteredGrid};
use crate::heuristics::{evaluate_all, Evaluation, HeuristicParams};
use crate::localmap::{OccupancyMap, PointCloud};
use crate::pose::Pose;
use crate::scalar::{cast, from_usize, is_finite, to_f64, Real};
use crate::tentacles::{
    extract_support_priority, sample_tentacles, ClassifiedVoxels, SensorRange, TentacleConfig, TentacleSet,
};

use super::robot::{check_collision, step_robot, RobotModel};
use super::sensor::{sense_rays, SensorConfig};
use super::world::WorldMap;

/// Offline and online planner parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavigationParams<T: Real> {
    pub grid: GridConfig<T>,
    pub tentacles: TentacleConfig<T>,
    pub heuristics: HeuristicParams<T>,
    pub control: ControlParams<T>,
    /// Local map cell size; the voxel size when `None`.
    pub map_resolution: Option<T>,
    /// Local map retention radius; the grid diagonal when `None`.
    pub map_bound_radius: Option<T>,
}

impl<T: Real> NavigationParams<T> {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.tentacles.validate()?;
        self.heuristics.validate()?;
        self.control.validate()?;
        if let Some(r) = self.map_resolution {
            if !(is_finite(r) && r > T::zero()) {
                return Err(Error::invalid("map_resolution", "must be finite and > 0"));
            }
        }
        if let Some(r) = self.map_bound_radius {
            if !(is_finite(r) && r > T::zero()) {
                return Err(Error::invalid("map_bound_radius", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn map_resolution(&self) -> T {
        self.map_resolution.unwrap_or(self.grid.voxel_size)
    }

    pub fn map_bound_radius(&self) -> T {
        self.map_bound_radius.unwrap_or_else(|| self.grid.diagonal())
    }
}

/// Everything computed before navigation starts. Immutable and shareable
/// between concurrent runs.
#[derive(Debug)]
pub struct Planner<T: Real> {
    params: NavigationParams<T>,
    tentacles: TentacleSet<T>,
    voxels: ClassifiedVoxels<T>,
    active: Vec<u32>,
}

impl<T: Real> Planner<T> {
    /// Samples tentacles (cut by `range`) and extracts their Support and
    /// Priority voxels.
    pub fn new(params: NavigationParams<T>, range: SensorRange<T>) -> Result<Self> {
        params.validate()?;
        let tentacles = sample_tentacles(&params.tentacles, |d| range.along(d))?;
        let voxels = extract_support_priority(&tentacles, &params.tentacles, &params.grid)?;
        let active = voxels.active_voxels(&params.grid);
        Ok(Self { params, tentacles, voxels, active })
    }

    /// Assembles a planner from an existing tentacle set and its extracted
    /// voxels.
    pub fn from_parts(
        params: NavigationParams<T>,
        tentacles: TentacleSet<T>,
        voxels: ClassifiedVoxels<T>,
    ) -> Result<Self> {
        params.validate()?;
        if tentacles.len() != voxels.tentacle_count() {
            return Err(Error::invalid("voxels", "one voxel list per tentacle is required"));
        }
        let active = voxels.active_voxels(&params.grid);
        Ok(Self { params, tentacles, voxels, active })
    }

    pub fn params(&self) -> &NavigationParams<T> {
        &self.params
    }

    pub fn tentacles(&self) -> &TentacleSet<T> {
        &self.tentacles
    }

    pub fn voxels(&self) -> &ClassifiedVoxels<T> {
        &self.voxels
    }

    /// Voxels referenced by at least one tentacle, ascending.
    pub fn active_voxels(&self) -> &[u32] {
        &self.active
    }
}

/// Per-run mutable state: grid occupancy, local map and controller state.
#[derive(Debug)]
pub struct Navigator<T: Real> {
    planner: Arc<Planner<T>>,
    grid: RobotCenteredGrid<T>,
    map: OccupancyMap<T>,
    state: ControlState<T>,
}

/// Outputs of one planning cycle.
#[derive(Debug, Clone)]
pub struct CycleOutput<T: Real> {
    pub evaluation: Evaluation<T>,
    pub command: PoseCommand<T>,
}

impl<T: Real> Navigator<T> {
    pub fn new(planner: Arc<Planner<T>>) -> Result<Self> {
        let p = planner.params();
        let grid = RobotCenteredGrid::new(p.grid)?;
        let map = OccupancyMap::new(p.map_resolution(), p.map_bound_radius())?;
        Ok(Self { planner, grid, map, state: ControlState::default() })
    }

    pub fn planner(&self) -> &Planner<T> {
        &self.planner
    }

    pub fn grid(&self) -> &RobotCenteredGrid<T> {
        &self.grid
    }

    pub fn map(&self) -> &OccupancyMap<T> {
        &self.map
    }

    pub fn state(&self) -> &ControlState<T> {
        &self.state
    }

    /// Inserts a sensor cloud and drops cells beyond the retention radius.
    pub fn update_map(&mut self, cloud: &PointCloud<T>, robot_pose: &Pose<T>) {
        self.map.insert_cloud(cloud, robot_pose);
        self.map.prune(&robot_pose.position);
    }

    /// Refreshes the grid around `robot_pose` and scores every tentacle.
    pub fn evaluate(&mut self, robot_pose: &Pose<T>, goal_world: &Vector3<T>) -> Evaluation<T> {
        let planner = &*self.planner;
        self.grid.refresh_occupancy(robot_pose, &self.map, &planner.active);
        let goal_robot = robot_pose.inverse_transform_point(goal_world);
        evaluate_all(
            &planner.tentacles,
            &planner.voxels,
            &self.grid,
            &goal_robot,
            self.state.previous_best,
            &planner.params.heuristics,
        )
    }

    /// Turns the selected tentacle into a pose command and advances the
    /// controller state.
    pub fn next_pose(
        &mut self,
        evaluation: &Evaluation<T>,
        best: Option<usize>,
        goal_robot: &Vector3<T>,
    ) -> PoseCommand<T> {
        let planner = &*self.planner;
        let selected = best.map(|j| (j, planner.tentacles.get(j)));
        let blocked = best.and_then(|j| evaluation.summaries[j].blocked_at);
        let (cmd, state) = calculate_next_pose(selected, blocked, goal_robot, &planner.params.control, &self.state);
        self.state = state;
        cmd
    }

    /// Map update, evaluation, selection and next pose in sequence.
    pub fn cycle(
        &mut self,
        cloud: Option<&PointCloud<T>>,
        robot_pose: &Pose<T>,
        goal_world: &Vector3<T>,
    ) -> CycleOutput<T> {
        if let Some(cloud) = cloud {
            self.update_map(cloud, robot_pose);
        }
        let evaluation = self.evaluate(robot_pose, goal_world);
        let goal_robot = robot_pose.inverse_transform_point(goal_world);
        let command = self.next_pose(&evaluation, evaluation.best, &goal_robot);
        CycleOutput { evaluation, command }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig<T: Real> {
    pub world: WorldMap<T>,
    pub start: Pose<T>,
    /// Goals visited in order, world frame.
    pub goals: Vec<Vector3<T>>,
    /// Goal tolerance `epsilon`, meters.
    pub tolerance: T,
    /// Seconds.
    pub time_limit: T,
    pub robot: RobotModel<T>,
    pub sensor: SensorConfig<T>,
    pub navigation: NavigationParams<T>,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(is_finite(self.time_limit) && self.time_limit > T::zero()) {
            return Err(Error::invalid("time_limit", "must be finite and > 0"));
        }
        if !(is_finite(self.tolerance) && self.tolerance > T::zero()) {
            return Err(Error::invalid("epsilon", "goal tolerance must be finite and > 0"));
        }
        if self.goals.is_empty() {
            return Err(Error::invalid("goals", "at least one goal is required"));
        }
        self.world.validate()?;
        self.robot.validate()?;
        self.sensor.validate()?;
        self.navigation.validate()?;
        let control = &self.navigation.control;
        if control.max_speed > self.robot.max_speed {
            return Err(Error::invalid("mu_max", "controller speed limit exceeds the robot's"));
        }
        let step = self.robot.max_speed * control.period;
        if let Some(r) = self.world.min_radius() {
            if step >= r {
                return Err(Error::invalid(
                    "mu_max",
                    format!("mu_max * d_t = {} must be below the smallest obstacle radius {}", to_f64(step), to_f64(r)),
                ));
            }
        }
        Ok(())
    }

    /// Offline setup for this scenario.
    pub fn planner(&self) -> Result<Planner<T>> {
        Planner::new(self.navigation, self.sensor.range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "success" => Ok(Outcome::Success),
            "collision" => Ok(Outcome::Collision),
            "timeout" => Ok(Outcome::Timeout),
            other => Err(Error::MapFormat(format!("unknown outcome `{other}`"))),
        }
    }
}

/// One line of the pose trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T: Real> {
    pub time: T,
    pub pose: Pose<T>,
    pub best: Option<usize>,
    pub speed: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult<T: Real> {
    pub outcome: Outcome,
    /// Seconds.
    pub duration: T,
    /// Meters.
    pub path_length: T,
    /// Goals reached before the run ended.
    pub goals_reached: usize,
    pub trace: Vec<TraceRecord<T>>,
}

impl<T: Real> ScenarioResult<T> {
    pub fn final_pose(&self) -> &Pose<T> {
        &self.trace.last().expect("trace always holds the start pose").pose
    }

    pub fn write_trace<W: Write>(&self, out: W) -> io::Result<()> {
        write_trace(&self.trace, out)
    }
}

/// Writes `t x y z qx qy qz qw j_best mu_t`, one record per line; `j_best` is
/// -1 when no tentacle was selected.
pub fn write_trace<T: Real, W: Write>(trace: &[TraceRecord<T>], mut out: W) -> io::Result<()> {
    for r in trace {
        let p = r.pose.position;
        let [qx, qy, qz, qw] = r.pose.quaternion_xyzw();
        let best = r.best.map_or(-1, |j| j as i64);
        writeln!(
            out,
            "{:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {} {:.6}",
            to_f64(r.time),
            to_f64(p.x),
            to_f64(p.y),
            to_f64(p.z),
            to_f64(qx),
            to_f64(qy),
            to_f64(qz),
            to_f64(qw),
            best,
            to_f64(r.speed)
        )?;
    }
    Ok(())
}

/// Parses a trace written by [`write_trace`]. Blank lines and `#` comments
/// are skipped.
pub fn read_trace<T: Real, R: BufRead>(input: R) -> Result<Vec<TraceRecord<T>>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| Error::MapFormat(format!("trace line {}: {what}", n + 1));
        if fields.len() != 10 {
            return Err(bad(&format!("expected 10 fields, found {}", fields.len())));
        }
        let mut v = [0f64; 8];
        for (slot, f) in v.iter_mut().zip(&fields[..8]) {
            *slot = f.parse().map_err(|_| bad(&format!("invalid number `{f}`")))?;
        }
        let best: i64 = fields[8].parse().map_err(|_| bad("invalid tentacle index"))?;
        let speed: f64 = fields[9].parse().map_err(|_| bad("invalid speed"))?;
        let q = Quaternion::new(cast(v[7]), cast(v[4]), cast(v[5]), cast(v[6]));
        records.push(TraceRecord {
            time: cast(v[0]),
            pose: Pose::new(Vector3::new(cast(v[1]), cast(v[2]), cast(v[3])), UnitQuaternion::from_quaternion(q)),
            best: usize::try_from(best).ok(),
            speed: cast(speed),
        });
    }
    Ok(records)
}

/// Sum of distances between consecutive trace positions.
pub fn path_length<T: Real>(trace: &[TraceRecord<T>]) -> T {
    trace.windows(2).fold(T::zero(), |acc, w| acc + (w[1].pose.position - w[0].pose.position).norm())
}

/// Runs the closed loop with a freshly built planner.
pub fn run_scenario<T: Real>(cfg: &ScenarioConfig<T>) -> Result<ScenarioResult<T>> {
    cfg.validate()?;
    let planner = Arc::new(cfg.planner()?);
    run_scenario_with(planner, cfg)
}

/// Runs the closed loop reusing an offline setup. The planner must have been
/// built from `cfg.navigation` and `cfg.sensor.range`.
pub fn run_scenario_with<T: Real>(planner: Arc<Planner<T>>, cfg: &ScenarioConfig<T>) -> Result<ScenarioResult<T>> {
    cfg.validate()?;
    if planner.params() != &cfg.navigation {
        return Err(Error::invalid("planner", "planner was built from different navigation parameters"));
    }
    let mut nav = Navigator::new(planner)?;
    let dt = cfg.navigation.control.period;
    let scan_period = T::one() / cfg.sensor.rate;
    let rays = cfg.sensor.ray_directions();
    // cycle boundaries are compared with a small slack against rounding
    let slack = dt * cast::<T>(1e-6);

    let mut pose = cfg.start;
    let mut time = T::zero();
    let mut cycle: usize = 0;
    let mut next_scan = T::zero();
    let mut goal = 0;
    let mut path = T::zero();
    let mut trace = vec![TraceRecord { time, pose, best: None, speed: T::zero() }];

    let outcome = loop {
        while goal < cfg.goals.len() && (pose.position - cfg.goals[goal]).norm() <= cfg.tolerance {
            goal += 1;
        }
        if goal == cfg.goals.len() {
            break Outcome::Success;
        }
        if time + slack >= cfg.time_limit {
            break Outcome::Timeout;
        }

        let cloud = if time + slack >= next_scan {
            next_scan += scan_period;
            Some(sense_rays(&cfg.world, &pose, &cfg.sensor, &rays, time))
        } else {
            None
        };
        let out = nav.cycle(cloud.as_ref(), &pose, &cfg.goals[goal]);
        let next = step_robot(&pose, &out.command, &cfg.robot, dt);

        cycle += 1;
        time = from_usize::<T>(cycle) * dt;
        path += (next.position - pose.position).norm();
        pose = next;
        trace.push(TraceRecord { time, pose, best: out.evaluation.best, speed: nav.state().speed });
        if check_collision(&cfg.world, &pose, &cfg.robot) {
            break Outcome::Collision;
        }
    };

    Ok(ScenarioResult { outcome, duration: time, path_length: path, goals_reached: goal, trace })
}
