//! Deterministic closed-loop simulator: worlds, sensing, robot motion and
//! the scenario runner.

pub mod robot;
pub mod scenario;
pub mod sensor;
pub mod world;

pub use robot::{box_hits_cylinder, check_collision, step_robot, RobotModel};
pub use scenario::{
    path_length, read_trace, run_scenario, run_scenario_with, write_trace, CycleOutput, NavigationParams, Navigator,
    Outcome, Planner, ScenarioConfig, ScenarioResult, TraceRecord,
};
pub use sensor::{default_sensor, ray_cylinder, ray_ground, sense, sense_rays, SensorConfig};
pub use world::{
    generate_cylinder_map, generate_forest_map, generate_forest_map_with, Bounds, Cylinder, CylinderMapParams,
    ForestParams, KeepOut, WorldMap,
};
