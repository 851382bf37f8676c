use std::collections::HashSet;

use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use tentacle_nav::heuristics::{evaluate_all, select_best, CostWeights};
use tentacle_nav::sim::{step_robot, RobotModel};
use tentacle_nav::{
    extract_support_priority, sample_tentacles, GridConfig, HeuristicParams, Pose, PoseCommand, RobotCenteredGrid,
    TentacleConfig, VoxelClass,
};

fn dims() -> impl Strategy<Value = [u32; 3]> {
    prop::array::uniform3(1u32..=12).prop_map(|h| h.map(|n| 2 * n))
}

fn tentacles(n_phi: u32, n_theta: u32, length: f64, spacing: f64) -> TentacleConfig<f64> {
    TentacleConfig {
        yaw_samples: n_phi,
        pitch_samples: n_theta,
        yaw_coverage: 1.2,
        pitch_coverage: 0.6,
        max_length: length,
        spacing,
        priority_threshold: 0.3,
        support_threshold: 0.45,
        max_weight: 1.0,
        weight_decay: 10.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn points_map_to_the_voxel_that_contains_them(
        d_v in 0.05f64..1.0,
        dims in dims(),
        u in prop::array::uniform3(0.0f64..1.0),
    ) {
        let cfg = GridConfig::new(d_v, dims).unwrap();
        let half = cfg.extent() / 2.0;
        let p = Vector3::new(u[0], u[1], u[2]).component_mul(&cfg.extent()) - half;
        if let Some(o) = cfg.linear_index(&p) {
            prop_assert!(o < cfg.voxel_count() as u32);
            let c = cfg.voxel_center(o);
            prop_assert!((p - c).amax() <= d_v / 2.0 + 1e-9);
            let [x, y, z] = cfg.coords_of_index(o);
            prop_assert_eq!(o, x + y * dims[0] + z * dims[0] * dims[1]);
        }
    }

    #[test]
    fn navigation_points_are_evenly_spaced(
        n_phi in 1u32..6,
        n_theta in 1u32..4,
        length in 0.5f64..8.0,
        spacing in 0.1f64..1.0,
    ) {
        let cfg = tentacles(n_phi, n_theta, length, spacing);
        let set = sample_tentacles(&cfg, |_| length).unwrap();
        prop_assert_eq!(set.len(), (n_phi * n_theta) as usize);
        for t in &set {
            let n = t.point_count();
            prop_assert!(t.spacing <= spacing + 1e-9);
            prop_assert!((t.spacing * n as f64 - t.length).abs() < 1e-9);
            prop_assert!((t.last_point().norm() - t.length).abs() < 1e-9);
            for (k, p) in t.nav_points().iter().enumerate() {
                prop_assert!((p.norm() - t.spacing * (k + 1) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn voxel_records_respect_thresholds(
        n_phi in 1u32..5,
        n_theta in 1u32..3,
        length in 0.5f64..2.5,
    ) {
        let cfg = tentacles(n_phi, n_theta, length, 0.3);
        let grid = GridConfig::cubic(0.2, 30).unwrap();
        let set = sample_tentacles(&cfg, |_| length).unwrap();
        let voxels = extract_support_priority(&set, &cfg, &grid).unwrap();
        for (j, t) in set.iter().enumerate() {
            let records = voxels.tentacle(j);
            prop_assert!(records.windows(2).all(|w| w[0].voxel < w[1].voxel));
            let mut seen = HashSet::new();
            for r in records {
                prop_assert!(seen.insert(r.voxel));
                let (m, d) = t.closest_point(&grid.voxel_center(r.voxel));
                prop_assert_eq!(m as u32, r.nav_index);
                match r.class {
                    VoxelClass::Priority => prop_assert!(d <= cfg.priority_threshold && r.weight == 1.0),
                    VoxelClass::Support => {
                        prop_assert!(d > cfg.priority_threshold && d <= cfg.support_threshold);
                        prop_assert!(r.weight > 0.0 && r.weight < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn selection_is_navigable_and_minimal(
        seed in any::<u64>(),
        crash in 0.05f64..1.0,
        goal in prop::array::uniform3(-6.0f64..6.0),
    ) {
        let cfg = tentacles(5, 3, 2.4, 0.3);
        let grid_cfg = GridConfig::cubic(0.2, 30).unwrap();
        let set = sample_tentacles(&cfg, |_| 2.4).unwrap();
        let voxels = extract_support_priority(&set, &cfg, &grid_cfg).unwrap();
        let mut grid = RobotCenteredGrid::new(grid_cfg).unwrap();
        let mut state = seed;
        for _ in 0..300 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            grid.set_belief((state >> 33) as u32 % grid.len() as u32, 1.0);
        }
        let params = HeuristicParams {
            crash_scale: crash,
            error_threshold: 0,
            weights: CostWeights { clearance: 1.0, clutter: 2.0, closeness: 2.0, smoothness: 0.3 },
        };
        let eval = evaluate_all(&set, &voxels, &grid, &Vector3::from(goal), Some(0), &params);
        prop_assert_eq!(eval.best, select_best(&eval.rows));
        match eval.best {
            Some(b) => {
                prop_assert!(eval.rows[b].navigability.value() != 0);
                for (j, r) in eval.rows.iter().enumerate() {
                    if r.navigability.value() != 0 {
                        prop_assert!(eval.rows[b].cost < r.cost || (eval.rows[b].cost == r.cost && b <= j));
                    }
                }
            }
            None => prop_assert!(eval.rows.iter().all(|r| r.navigability.value() == 0)),
        }
    }

    #[test]
    fn robot_motion_is_rate_limited(
        dx in prop::array::uniform3(-3.0f64..3.0),
        angles in prop::array::uniform3(-3.0f64..3.0),
        yaw0 in -3.0f64..3.0,
        dt in 0.01f64..0.5,
    ) {
        let model = RobotModel { width: 0.3, length: 0.3, height: 0.15, max_speed: 1.2, max_angular_rates: [1.5, 0.5, 0.5] };
        let pose = Pose::from_position_yaw(Vector3::new(1.0, 2.0, 1.0), yaw0);
        let cmd = PoseCommand {
            position: Vector3::from(dx),
            orientation: UnitQuaternion::from_euler_angles(angles[0], angles[1], angles[2]),
            yaw: angles[2],
        };
        let next = step_robot(&pose, &cmd, &model, dt);
        prop_assert!((next.position - pose.position).norm() <= model.max_speed * dt + 1e-9);
        prop_assert!(next.is_normalized());
        let turn = pose.orientation.angle_to(&next.orientation);
        let limit = model.max_angular_rates.iter().map(|r| r * dt).sum::<f64>();
        prop_assert!(turn <= limit + 1e-9, "turned {} > {}", turn, limit);
    }
}
