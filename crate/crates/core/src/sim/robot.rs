//! First-order kinematic robot: ideal pose tracking under speed limits and
//! bounding-box collision checks.

use nalgebra::{UnitQuaternion, Vector2};

use crate::controller::PoseCommand;
use crate::error::{Error, Result};
use crate::pose::Pose;
use crate::scalar::{cast, is_finite, Real};

use super::world::{Cylinder, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotModel<T: Real> {
    /// Extent along robot y, meters (`w_R`).
    pub width: T,
    /// Extent along robot x, meters (`l_R`).
    pub length: T,
    /// Extent along robot z, meters (`h_R`).
    pub height: T,
    /// m/s (`mu_max`).
    pub max_speed: T,
    /// Max angular rates in yaw, pitch, roll, rad/s (`omega_phi`,
    /// `omega_theta`, `omega_psi`).
    pub max_angular_rates: [T; 3],
}

impl<T: Real> RobotModel<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| is_finite(v) && v > T::zero();
        for (name, v) in [("w_R", self.width), ("l_R", self.length), ("h_R", self.height), ("mu_max", self.max_speed)] {
            if !positive(v) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        for (name, v) in ["omega_phi", "omega_theta", "omega_psi"].into_iter().zip(self.max_angular_rates) {
            if !positive(v) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// Diagonal of the footprint rectangle.
    pub fn footprint_diagonal(&self) -> T {
        (self.width * self.width + self.length * self.length).sqrt()
    }
}

/// Advances the robot toward a command expressed in its own frame.
///
/// Translation is limited to `max_speed * dt` and each Euler angle of the
/// commanded rotation to its rate limit times `dt`; commands within limits are
/// reached exactly.
pub fn step_robot<T: Real>(pose: &Pose<T>, cmd: &PoseCommand<T>, model: &RobotModel<T>, dt: T) -> Pose<T> {
    let max_step = model.max_speed * dt;
    let mut delta = cmd.position;
    let len = delta.norm();
    if len > max_step {
        delta *= max_step / len;
    }

    let (roll, pitch, yaw) = cmd.orientation.euler_angles();
    let [w_yaw, w_pitch, w_roll] = model.max_angular_rates;
    let limit = |angle: T, rate: T| {
        let m = rate * dt;
        angle.clamp(-m, m)
    };
    let within = roll.abs() <= w_roll * dt && pitch.abs() <= w_pitch * dt && yaw.abs() <= w_yaw * dt;
    let rotation = if within {
        cmd.orientation
    } else {
        UnitQuaternion::from_euler_angles(limit(roll, w_roll), limit(pitch, w_pitch), limit(yaw, w_yaw))
    };

    let position = pose.position + pose.orientation * delta;
    let mut orientation = pose.orientation * rotation;
    orientation.renormalize();
    Pose::new(position, orientation)
}

/// Footprint rectangle (oriented by the robot's yaw) against a circle, plus
/// vertical overlap.
pub fn box_hits_cylinder<T: Real>(pose: &Pose<T>, model: &RobotModel<T>, cyl: &Cylinder<T>) -> bool {
    let half_h = model.height * cast::<T>(0.5);
    let z = pose.position.z;
    if z - half_h > cyl.height || z + half_h < T::zero() {
        return false;
    }
    let yaw = pose.yaw();
    let (s, c) = yaw.sin_cos();
    let d = cyl.center - pose.position.xy();
    // circle center in the robot's footprint frame
    let local = Vector2::new(c * d.x + s * d.y, -s * d.x + c * d.y);
    let half = Vector2::new(model.length, model.width) * cast::<T>(0.5);
    let closest = Vector2::new(local.x.clamp(-half.x, half.x), local.y.clamp(-half.y, half.y));
    (local - closest).norm_squared() <= cyl.radius * cyl.radius
}

/// `true` when the robot's box touches any cylinder or dips below the ground.
pub fn check_collision<T: Real>(world: &WorldMap<T>, pose: &Pose<T>, model: &RobotModel<T>) -> bool {
    if pose.position.z - model.height * cast::<T>(0.5) < T::zero() {
        return true;
    }
    world.obstacles.iter().any(|c| box_hits_cylinder(pose, model, c))
}
