//! Reactive navigation by heuristically evaluated pre-sampled trajectories.
//!
//! A fixed set of straight "tentacles" is sampled in the robot frame once,
//! together with the grid voxels surrounding each of them. Every cycle the
//! voxels are refreshed from a world-frame local map, each tentacle is scored
//! for navigability, clearance, clutter, goal closeness and smoothness, and the
//! cheapest navigable one is turned into a short pose command.
//!
//! All numeric code is generic over [`Real`]; the aliases below fix it to
//! `f64` (and `f32` with an `F32` suffix).
//!
//! ```
//! use tentacle_nav::{Grid, GridConfig};
//!
//! let cfg = GridConfig::cubic(0.5, 4).unwrap();
//! let grid = Grid::new(cfg).unwrap();
//! assert_eq!(grid.len(), 64);
//! assert_eq!(cfg.linear_index(&nalgebra::Vector3::new(0.1, 0.1, 0.1)), Some(42));
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod grid;
pub mod heuristics;
pub mod localmap;
pub mod pose;
pub mod scalar;
pub mod sim;
pub mod tentacles;

pub use controller::{calculate_next_pose, ControlParams, ControlState, PoseCommand};
pub use error::{Error, Result};
pub use grid::{GridConfig, RobotCenteredGrid};
pub use heuristics::{
    evaluate_all, select_best, CostWeights, Evaluation, HeuristicParams, Navigability, OccupancySummary,
    TentacleEvaluation,
};
pub use localmap::{CloudPoint, OccupancyMap, PointCloud};
pub use pose::Pose;
pub use scalar::Real;
pub use tentacles::{
    extract_support_priority, sample_tentacles, ClassifiedVoxels, SensorRange, Tentacle, TentacleConfig, TentacleSet,
    VoxelClass, VoxelRecord,
};

pub type Grid = RobotCenteredGrid<f64>;
pub type Map = OccupancyMap<f64>;
pub type Cloud = PointCloud<f64>;
pub type Tentacles = TentacleSet<f64>;
pub type Voxels = ClassifiedVoxels<f64>;
pub type Scenario = sim::ScenarioConfig<f64>;
pub type Outcome = sim::Outcome;

pub type GridF32 = RobotCenteredGrid<f32>;
pub type MapF32 = OccupancyMap<f32>;
pub type CloudF32 = PointCloud<f32>;
pub type TentaclesF32 = TentacleSet<f32>;
pub type VoxelsF32 = ClassifiedVoxels<f32>;
pub type ScenarioF32 = sim::ScenarioConfig<f32>;
