use nalgebra::{Vector2, Vector3};
use tentacle_nav::heuristics::CostWeights;
use tentacle_nav::sim::{
    run_scenario, Bounds, Cylinder, NavigationParams, Outcome, RobotModel, ScenarioConfig, SensorConfig, WorldMap,
};
use tentacle_nav::{scalar::cast, ControlParams, GridConfig, HeuristicParams, Pose, Real, SensorRange, TentacleConfig};

fn config<T: Real>(goal: [f64; 3], obstacles: &[(f64, f64, f64)]) -> ScenarioConfig<T> {
    let c = cast::<T>;
    let deg = |d: f64| c(d.to_radians());
    ScenarioConfig {
        world: WorldMap {
            obstacles: obstacles
                .iter()
                .map(|&(x, y, r)| Cylinder { center: Vector2::new(c(x), c(y)), radius: c(r), height: c(3.0) })
                .collect(),
            bounds: Bounds::new(Vector2::new(c(-10.0), c(-10.0)), Vector2::new(c(20.0), c(10.0))),
            seed: 0,
        },
        start: Pose::from_position_yaw(Vector3::new(T::zero(), T::zero(), T::one()), T::zero()),
        goals: vec![Vector3::new(c(goal[0]), c(goal[1]), c(goal[2]))],
        tolerance: c(0.3),
        time_limit: c(40.0),
        robot: RobotModel {
            width: c(0.3),
            length: c(0.3),
            height: c(0.15),
            max_speed: c(0.9),
            max_angular_rates: [deg(90.0); 3],
        },
        sensor: SensorConfig {
            horizontal_fov: deg(90.0),
            vertical_fov: deg(60.0),
            resolution: deg(2.0),
            range: SensorRange::Constant(c(5.0)),
            rate: c(10.0),
        },
        navigation: NavigationParams {
            grid: GridConfig::cubic(c(0.25), 48).unwrap(),
            tentacles: TentacleConfig {
                yaw_samples: 11,
                pitch_samples: 5,
                yaw_coverage: deg(60.0),
                pitch_coverage: deg(30.0),
                max_length: c(5.0),
                spacing: c(0.35),
                priority_threshold: c(0.35),
                support_threshold: c(0.5),
                max_weight: T::one(),
                weight_decay: c(10.0),
            },
            heuristics: HeuristicParams {
                crash_scale: c(0.1),
                error_threshold: 0,
                weights: CostWeights { clearance: c(3.0), clutter: c(4.0), closeness: c(2.0), smoothness: c(0.3) },
            },
            control: ControlParams {
                angular_weight: T::one(),
                nominal_speed: c(0.8),
                speed_step: c(0.1),
                max_speed: c(0.9),
                min_speed: c(0.2),
                max_yaw_rate: deg(90.0),
                period: c(0.1),
            },
            map_resolution: None,
            map_bound_radius: None,
        },
    }
}

const POLES: &[(f64, f64, f64)] = &[(4.0, 0.8, 0.4), (8.0, -0.8, 0.3)];

#[test]
fn runs_are_bit_identical() {
    let cfg = config::<f64>([12.0, 0.0, 1.0], POLES);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    let (mut ta, mut tb) = (Vec::new(), Vec::new());
    a.write_trace(&mut ta).unwrap();
    b.write_trace(&mut tb).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(a.path_length.to_bits(), b.path_length.to_bits());
}

#[test]
fn slalom_succeeds_with_bounded_steps() {
    let cfg = config::<f64>([12.0, 0.0, 1.0], POLES);
    let res = run_scenario(&cfg).unwrap();
    assert_eq!(res.outcome, Outcome::Success, "ended at {:?}", res.final_pose().position);
    let goal = cfg.goals[0];
    assert!((res.final_pose().position - goal).norm() <= cfg.tolerance);

    let bound = cfg.navigation.control.max_speed * cfg.navigation.control.period + 1e-12;
    let mut travelled = 0.0;
    for w in res.trace.windows(2) {
        let step = (w[1].pose.position - w[0].pose.position).norm();
        assert!(step <= bound, "step {step}");
        assert!(w[1].time > w[0].time);
        travelled += step;
        assert!(travelled <= res.path_length + 1e-9);
    }
    assert!((travelled - res.path_length).abs() < 1e-9);
    assert!(res.trace.iter().all(|r| r.pose.is_normalized()));
}

#[test]
fn pole_on_the_line_is_avoided() {
    let cfg = config::<f64>([10.0, 0.0, 1.0], &[(5.0, 0.0, 0.5)]);
    let res = run_scenario(&cfg).unwrap();
    assert_eq!(res.outcome, Outcome::Success);
    let max_offset = res.trace.iter().map(|r| r.pose.position.y.abs()).fold(0.0, f64::max);
    assert!(max_offset > 0.5, "never left the line: {max_offset}");
}

#[test]
fn single_precision_reaches_goal() {
    let cfg = config::<f32>([6.0, 0.0, 1.0], &[]);
    let res = run_scenario(&cfg).unwrap();
    assert_eq!(res.outcome, Outcome::Success);
    assert!(res.path_length > 5.5 && res.path_length < 6.3, "{}", res.path_length);
}
