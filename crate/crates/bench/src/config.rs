//! TOML benchmark configuration.
//!
//! Parameters keep their conventional short names (`tau_P`, `n_v_x`,
//! `lambda_close`, ...). Angles are in degrees and angular rates in degrees
//! per second; everything else is SI. Every key is optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tentacle_nav::heuristics::CostWeights;
use tentacle_nav::sim::{NavigationParams, RobotModel, SensorConfig};
use tentacle_nav::{ControlParams, GridConfig, HeuristicParams, SensorRange, TentacleConfig};

use crate::error::BenchError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Global seed for maps and trials.
    pub seed: u64,
    pub output_dir: String,
    pub robot: RobotSection,
    pub sensor: SensorSection,
    pub offline: OfflineSection,
    pub online: OnlineSection,
    pub map: MapSection,
    pub scenario: ScenarioSection,
    pub benchmark: BenchmarkSection,
    pub timing: TimingSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: "bench-out".into(),
            robot: RobotSection::default(),
            sensor: SensorSection::default(),
            offline: OfflineSection::default(),
            online: OnlineSection::default(),
            map: MapSection::default(),
            scenario: ScenarioSection::default(),
            benchmark: BenchmarkSection::default(),
            timing: TimingSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotSection {
    #[serde(rename = "w_R")]
    pub width: f64,
    #[serde(rename = "l_R")]
    pub length: f64,
    #[serde(rename = "h_R")]
    pub height: f64,
    pub mu_max: f64,
    pub omega_phi: f64,
    pub omega_theta: f64,
    pub omega_psi: f64,
}

impl Default for RobotSection {
    fn default() -> Self {
        Self { width: 0.3, length: 0.3, height: 0.15, mu_max: 0.9, omega_phi: 90.0, omega_theta: 90.0, omega_psi: 90.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSection {
    pub fov_h: f64,
    pub fov_v: f64,
    /// Angular spacing of the ray lattice.
    pub d_s: f64,
    pub rho_x: f64,
    pub rho_y: f64,
    pub rho_z: f64,
    #[serde(rename = "f_S")]
    pub rate: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self { fov_h: 90.0, fov_v: 60.0, d_s: 1.0, rho_x: 10.0, rho_y: 10.0, rho_z: 10.0, rate: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfflineSection {
    pub d_v: f64,
    pub n_v_x: u32,
    pub n_v_y: u32,
    pub n_v_z: u32,
    pub n_phi: u32,
    pub n_theta: u32,
    pub n_psi: u32,
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub l_t_max: f64,
    pub delta_d: f64,
    #[serde(rename = "tau_P")]
    pub tau_p: f64,
    #[serde(rename = "tau_S")]
    pub tau_s: f64,
    pub beta_max: f64,
    pub alpha_beta: f64,
}

impl Default for OfflineSection {
    fn default() -> Self {
        Self {
            d_v: 0.2,
            n_v_x: 110,
            n_v_y: 110,
            n_v_z: 110,
            n_phi: 31,
            n_theta: 21,
            n_psi: 1,
            phi: 60.0,
            theta: 45.0,
            psi: 0.0,
            l_t_max: 10.0,
            delta_d: 0.35,
            tau_p: 0.35,
            tau_s: 0.5,
            beta_max: 1.0,
            alpha_beta: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineSection {
    pub alpha_crash: f64,
    #[serde(rename = "tau_D_err")]
    pub tau_d_err: u32,
    pub lambda_clear: f64,
    pub lambda_clut: f64,
    pub lambda_close: f64,
    pub lambda_smo: f64,
    pub alpha_omega: f64,
    pub mu_nom: f64,
    pub delta_mu: f64,
    pub mu_min: f64,
    pub d_t: f64,
}

impl Default for OnlineSection {
    fn default() -> Self {
        Self {
            alpha_crash: 0.15,
            tau_d_err: 0,
            lambda_clear: 1.0,
            lambda_clut: 2.0,
            lambda_close: 2.0,
            lambda_smo: 0.3,
            alpha_omega: 1.0,
            mu_nom: 0.8,
            delta_mu: 0.1,
            mu_min: 0.2,
            d_t: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MapSection {
    /// Local map cell size; `d_v` when absent.
    pub resolution: Option<f64>,
    /// Local map retention radius; the grid diagonal when absent.
    pub bound_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub epsilon: f64,
    pub time_limit: f64,
    /// Flight height of start and goals.
    pub altitude: f64,
    /// Distance between the map edge and the start or goal.
    pub standoff: f64,
    /// Half-width of the per-trial lateral offset of start and goal.
    pub trial_jitter: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self { epsilon: 0.5, time_limit: 60.0, altitude: 1.0, standoff: 1.5, trial_jitter: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Forest,
    Cylinders,
    Empty,
}

impl std::str::FromStr for MapKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "forest" => Ok(MapKind::Forest),
            "cylinders" => Ok(MapKind::Cylinders),
            "empty" => Ok(MapKind::Empty),
            other => {
                Err(BenchError::Usage(format!("unknown map type `{other}` (expected forest, cylinders or empty)")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSpec {
    #[serde(rename = "type")]
    pub kind: MapKind,
    /// Square area, m^2 (forest and empty maps).
    pub area: f64,
    /// Obstacles per m^2 (forest maps).
    pub density: f64,
    /// Number of cylinders (cylinder maps).
    pub count: u32,
    /// Fixed map seed; derived from the global seed when absent.
    pub seed: Option<u64>,
    /// Overrides `benchmark.trials`.
    pub trials: Option<u32>,
    /// Overrides `scenario.time_limit`.
    pub time_limit: Option<f64>,
    /// Overrides `scenario.epsilon`.
    pub epsilon: Option<f64>,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            kind: MapKind::Forest,
            area: 100.0,
            density: 0.2,
            count: 25,
            seed: None,
            trials: None,
            time_limit: None,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub trials: u32,
    pub write_traces: bool,
    pub maps: Vec<MapSpec>,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self { trials: 10, write_traces: true, maps: vec![MapSpec::default(); 10] }
    }
}

/// One column of the timing probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingCase {
    pub label: String,
    pub d_v: f64,
    pub n_v: u32,
    pub n_phi: u32,
    pub n_theta: u32,
}

impl Default for TimingCase {
    fn default() -> Self {
        Self { label: "dv0.2_nv110_nt651".into(), d_v: 0.2, n_v: 110, n_phi: 31, n_theta: 21 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub warmup_cycles: u32,
    pub cycles: u32,
    /// Repetitions of each initialization step.
    pub init_repeats: u32,
    pub cases: Vec<TimingCase>,
}

impl Default for TimingSection {
    fn default() -> Self {
        let case = |label: &str, d_v, n_v, n_phi, n_theta| TimingCase { label: label.into(), d_v, n_v, n_phi, n_theta };
        Self {
            warmup_cycles: 50,
            cycles: 200,
            init_repeats: 5,
            cases: vec![
                case("dv0.2_nv110_nt651", 0.2, 110, 31, 21),
                case("dv0.1_nv220_nt651", 0.1, 220, 31, 21),
                case("dv0.1_nv220_nt1271", 0.1, 220, 41, 31),
            ],
        }
    }
}

fn check(ok: bool, name: &str, reason: &str) -> Result<(), BenchError> {
    if ok {
        Ok(())
    } else {
        Err(BenchError::Validation(format!("`{name}`: {reason}")))
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Parse(e.to_string()))
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let cfg = Self::from_toml_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn robot_model(&self) -> RobotModel<f64> {
        let r = &self.robot;
        RobotModel {
            width: r.width,
            length: r.length,
            height: r.height,
            max_speed: r.mu_max,
            max_angular_rates: [r.omega_phi.to_radians(), r.omega_theta.to_radians(), r.omega_psi.to_radians()],
        }
    }

    pub fn sensor_config(&self) -> SensorConfig<f64> {
        let s = &self.sensor;
        SensorConfig {
            horizontal_fov: s.fov_h.to_radians(),
            vertical_fov: s.fov_v.to_radians(),
            resolution: s.d_s.to_radians(),
            range: self.sensor_range(),
            rate: s.rate,
        }
    }

    pub fn sensor_range(&self) -> SensorRange<f64> {
        let s = &self.sensor;
        if s.rho_x == s.rho_y && s.rho_y == s.rho_z {
            SensorRange::Constant(s.rho_x)
        } else {
            SensorRange::Ellipsoid([s.rho_x, s.rho_y, s.rho_z])
        }
    }

    pub fn grid_config(&self) -> GridConfig<f64> {
        let o = &self.offline;
        GridConfig { voxel_size: o.d_v, dims: [o.n_v_x, o.n_v_y, o.n_v_z] }
    }

    pub fn tentacle_config(&self) -> TentacleConfig<f64> {
        let o = &self.offline;
        TentacleConfig {
            yaw_samples: o.n_phi,
            pitch_samples: o.n_theta,
            yaw_coverage: o.phi.to_radians(),
            pitch_coverage: o.theta.to_radians(),
            max_length: o.l_t_max,
            spacing: o.delta_d,
            priority_threshold: o.tau_p,
            support_threshold: o.tau_s,
            max_weight: o.beta_max,
            weight_decay: o.alpha_beta,
        }
    }

    pub fn heuristic_params(&self) -> HeuristicParams<f64> {
        let o = &self.online;
        HeuristicParams {
            crash_scale: o.alpha_crash,
            error_threshold: o.tau_d_err,
            weights: CostWeights {
                clearance: o.lambda_clear,
                clutter: o.lambda_clut,
                closeness: o.lambda_close,
                smoothness: o.lambda_smo,
            },
        }
    }

    pub fn control_params(&self) -> ControlParams<f64> {
        let o = &self.online;
        ControlParams {
            angular_weight: o.alpha_omega,
            nominal_speed: o.mu_nom,
            speed_step: o.delta_mu,
            max_speed: self.robot.mu_max,
            min_speed: o.mu_min,
            max_yaw_rate: self.robot.omega_phi.to_radians(),
            period: o.d_t,
        }
    }

    pub fn navigation_params(&self) -> NavigationParams<f64> {
        NavigationParams {
            grid: self.grid_config(),
            tentacles: self.tentacle_config(),
            heuristics: self.heuristic_params(),
            control: self.control_params(),
            map_resolution: self.map.resolution,
            map_bound_radius: self.map.bound_radius,
        }
    }

    /// Copy with the grid and tentacle counts of a timing case.
    pub fn with_timing_case(&self, case: &TimingCase) -> Self {
        let mut cfg = self.clone();
        cfg.offline.d_v = case.d_v;
        cfg.offline.n_v_x = case.n_v;
        cfg.offline.n_v_y = case.n_v;
        cfg.offline.n_v_z = case.n_v;
        cfg.offline.n_phi = case.n_phi;
        cfg.offline.n_theta = case.n_theta;
        cfg
    }

    /// Rejects inconsistent parameter combinations with a message naming the
    /// violated invariant.
    pub fn validate(&self) -> Result<(), BenchError> {
        let o = &self.offline;
        check(o.n_psi == 1, "n_psi", "linear tentacles are roll invariant; n_psi must be 1")?;
        check(o.psi == 0.0, "psi", "linear tentacles are roll invariant; psi must be 0")?;
        check(o.tau_s > o.tau_p, "tau_S", &format!("tau_S ({}) must be greater than tau_P ({})", o.tau_s, o.tau_p))?;
        check(
            self.online.mu_nom <= self.robot.mu_max,
            "mu_nom",
            &format!("mu_nom ({}) must be <= mu_max ({})", self.online.mu_nom, self.robot.mu_max),
        )?;
        self.robot_model().validate()?;
        self.sensor_config().validate()?;
        self.navigation_params().validate()?;

        let s = &self.scenario;
        check(s.epsilon > 0.0, "epsilon", "goal tolerance must be > 0")?;
        check(s.time_limit > 0.0, "time_limit", "must be > 0")?;
        check(s.altitude > self.robot.height / 2.0, "altitude", "robot would touch the ground at the start")?;
        check(s.standoff >= 0.0, "standoff", "must be >= 0")?;
        check(s.trial_jitter >= 0.0, "trial_jitter", "must be >= 0")?;

        let b = &self.benchmark;
        check(b.trials >= 1, "benchmark.trials", "trial count must be >= 1")?;
        for (i, m) in b.maps.iter().enumerate() {
            let name = |field: &str| format!("benchmark.maps[{i}].{field}");
            check(m.area > 0.0, &name("area"), "must be > 0")?;
            check(m.density >= 0.0, &name("density"), "must be >= 0")?;
            check(m.trials != Some(0), &name("trials"), "trial count must be >= 1")?;
            check(m.time_limit.is_none_or(|t| t > 0.0), &name("time_limit"), "must be > 0")?;
            check(m.epsilon.is_none_or(|e| e > 0.0), &name("epsilon"), "must be > 0")?;
        }
        let t = &self.timing;
        check(t.warmup_cycles >= 50, "timing.warmup_cycles", "at least 50 warm-up cycles are discarded")?;
        check(t.cycles >= 1, "timing.cycles", "must be >= 1")?;
        check(t.init_repeats >= 1, "timing.init_repeats", "must be >= 1")?;
        for case in &t.cases {
            self.with_timing_case(case).navigation_params().validate()?;
        }
        Ok(())
    }
}
