//! Next-pose calculation for the selected tentacle.
//!
//! The commanded yaw turns toward the tentacle's first navigation point,
//! limited by the yaw rate. The commanded position lies on the segment toward
//! the first blocked navigation point (or the tip), at the distance covered in
//! one cycle at a lateral speed that ramps toward its nominal value.

use nalgebra::{UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::scalar::{cast, is_finite, Real};
use crate::tentacles::Tentacle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams<T: Real> {
    /// Angular velocity weight in `(0, 1]` (`alpha_omega`).
    pub angular_weight: T,
    /// Nominal lateral speed, m/s (`mu_nom`).
    pub nominal_speed: T,
    /// Speed ramp per cycle, m/s (`delta_mu`).
    pub speed_step: T,
    /// m/s (`mu_max`).
    pub max_speed: T,
    /// m/s (`mu_min`).
    pub min_speed: T,
    /// Max yaw rate, rad/s (`omega_phi`).
    pub max_yaw_rate: T,
    /// Cycle period, seconds (`d_t`).
    pub period: T,
}

impl<T: Real> ControlParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.angular_weight > T::zero() && self.angular_weight <= T::one()) {
            return Err(Error::invalid("alpha_omega", "must lie in (0, 1]"));
        }
        if !(is_finite(self.min_speed) && self.min_speed >= T::zero()) {
            return Err(Error::invalid("mu_min", "must be finite and >= 0"));
        }
        if !(is_finite(self.max_speed) && self.max_speed > T::zero()) {
            return Err(Error::invalid("mu_max", "must be finite and > 0"));
        }
        if !(self.min_speed <= self.nominal_speed) {
            return Err(Error::invalid("mu_nom", "mu_nom must be >= mu_min"));
        }
        if !(self.nominal_speed <= self.max_speed) {
            return Err(Error::invalid("mu_nom", "mu_nom must be <= mu_max"));
        }
        if !(is_finite(self.speed_step) && self.speed_step > T::zero()) {
            return Err(Error::invalid("delta_mu", "must be finite and > 0"));
        }
        if !(is_finite(self.max_yaw_rate) && self.max_yaw_rate > T::zero()) {
            return Err(Error::invalid("omega_phi", "must be finite and > 0"));
        }
        if !(is_finite(self.period) && self.period > T::zero()) {
            return Err(Error::invalid("d_t", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Largest yaw change commanded in one cycle.
    pub fn yaw_limit(&self) -> T {
        self.angular_weight * self.max_yaw_rate * self.period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlState<T: Real> {
    /// Current commanded lateral speed `mu_t`, m/s.
    pub speed: T,
    /// Tentacle selected on the previous cycle.
    pub previous_best: Option<usize>,
}

/// Target pose relative to the current robot frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCommand<T: Real> {
    pub position: Vector3<T>,
    /// Yaw-only rotation.
    pub orientation: UnitQuaternion<T>,
    /// Commanded yaw angle, radians.
    pub yaw: T,
}

impl<T: Real> PoseCommand<T> {
    pub fn hold() -> Self {
        Self { position: Vector3::zeros(), orientation: UnitQuaternion::identity(), yaw: T::zero() }
    }
}

/// Moves `speed` toward `nominal` by at most `step`.
fn ramp<T: Real>(speed: T, nominal: T, step: T) -> T {
    if nominal >= speed {
        if nominal - speed > step {
            speed + step
        } else {
            nominal
        }
    } else if speed - nominal > step {
        speed - step
    } else {
        nominal
    }
}

/// Computes the next pose command and the updated controller state.
///
/// `best` is the selected tentacle and its index; `blocked_at` is its first
/// blocked navigation point, if any. With no selection the robot holds
/// position and its speed ramps down by one step.
pub fn calculate_next_pose<T: Real>(
    best: Option<(usize, &Tentacle<T>)>,
    blocked_at: Option<usize>,
    goal_robot: &Vector3<T>,
    params: &ControlParams<T>,
    state: &ControlState<T>,
) -> (PoseCommand<T>, ControlState<T>) {
    let Some((index, tentacle)) = best else {
        let speed = (state.speed - params.speed_step).clamp(params.min_speed, params.max_speed);
        return (PoseCommand::hold(), ControlState { speed, previous_best: state.previous_best });
    };

    let yaw_max = params.max_yaw_rate * params.period;
    let first = tentacle.first_point();
    let mut yaw = first.y.atan2(first.x);
    if yaw.abs() > yaw_max {
        yaw = yaw_max * yaw.signum();
    }
    yaw *= params.angular_weight;
    let orientation = UnitQuaternion::from_euler_angles(T::zero(), T::zero(), yaw);

    let mut speed = ramp(state.speed, params.nominal_speed, params.speed_step);
    if goal_robot.norm() < cast::<T>(0.25) * tentacle.length {
        speed -= cast::<T>(2.0) * params.speed_step;
    }
    speed = speed.clamp(params.min_speed, params.max_speed);

    let target = match blocked_at {
        Some(k) => tentacle.nav_point(k),
        None => tentacle.last_point(),
    };
    let reach = speed * params.period;
    let span = target.norm();
    let position = if span > T::zero() { target * (reach / span).min(T::one()) } else { Vector3::zeros() };

    (PoseCommand { position, orientation, yaw }, ControlState { speed, previous_best: Some(index) })
}
