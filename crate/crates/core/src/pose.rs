//! Rigid-body poses in the world (W), robot (R) and sensor (S) frames.

use nalgebra::{UnitQuaternion, Vector3};

use crate::scalar::{cast, Real};

/// Position plus unit-quaternion orientation. Which frame the pose is
/// expressed in is up to the holder; a robot pose maps robot-frame points
/// into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T: Real> {
    pub position: Vector3<T>,
    pub orientation: UnitQuaternion<T>,
}

impl<T: Real> Default for Pose<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vector3<T>, orientation: UnitQuaternion<T>) -> Self {
        Self { position, orientation }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), UnitQuaternion::identity())
    }

    /// Pose at `position` rotated by `yaw` radians about +z.
    pub fn from_position_yaw(position: Vector3<T>, yaw: T) -> Self {
        Self::new(position, UnitQuaternion::from_euler_angles(T::zero(), T::zero(), yaw))
    }

    /// Maps a point expressed in this pose's local frame into the parent frame.
    #[inline]
    pub fn transform_point(&self, local: &Vector3<T>) -> Vector3<T> {
        self.orientation * local + self.position
    }

    /// Maps a parent-frame point into this pose's local frame.
    #[inline]
    pub fn inverse_transform_point(&self, parent: &Vector3<T>) -> Vector3<T> {
        self.orientation.inverse_transform_vector(&(parent - self.position))
    }

    pub fn yaw(&self) -> T {
        self.orientation.euler_angles().2
    }

    /// Quaternion components in `(x, y, z, w)` order.
    pub fn quaternion_xyzw(&self) -> [T; 4] {
        let q = self.orientation.quaternion();
        [q.i, q.j, q.k, q.w]
    }

    /// `true` when the stored quaternion has unit norm within `1e-9`
    /// (`1e-5` for single precision).
    pub fn is_normalized(&self) -> bool {
        let tol = if core::mem::size_of::<T>() < 8 { cast::<T>(1e-5) } else { cast::<T>(1e-9) };
        (self.orientation.quaternion().norm() - T::one()).abs() <= tol
    }
}
