//! Analytic depth sensor: casts a lattice of rays against the world's
//! cylinders and the ground plane.
//!
//! The sensor frame coincides with the robot frame. Every ray that hits
//! something within range contributes one point with belief 1.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::localmap::{CloudPoint, PointCloud};
use crate::pose::Pose;
use crate::scalar::{cast, is_finite, Real};
use crate::tentacles::{angle_samples, SensorRange};

use super::world::{Cylinder, WorldMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig<T: Real> {
    /// Radians.
    pub horizontal_fov: T,
    /// Radians.
    pub vertical_fov: T,
    /// Angular spacing between rays, radians (`d_s`).
    pub resolution: T,
    /// Max range along each direction (`rho_x`, `rho_y`, `rho_z`).
    pub range: SensorRange<T>,
    /// Scan rate, Hz (`f_S`).
    pub rate: T,
}

impl<T: Real> SensorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| is_finite(v) && v > T::zero();
        if !positive(self.horizontal_fov) || !positive(self.vertical_fov) {
            return Err(Error::invalid("fov", "sensor field of view must be > 0"));
        }
        if !positive(self.resolution) {
            return Err(Error::invalid("d_s", "sensor resolution must be > 0"));
        }
        let ok = match self.range {
            SensorRange::Constant(r) => positive(r),
            SensorRange::Ellipsoid(r) => r.iter().all(|&v| positive(v)),
        };
        if !ok {
            return Err(Error::invalid("rho", "sensor ranges must be > 0"));
        }
        if !positive(self.rate) {
            return Err(Error::invalid("f_S", "sensor rate must be > 0"));
        }
        Ok(())
    }

    /// Unit ray directions in the sensor frame, elevation-major.
    pub fn ray_directions(&self) -> Vec<Vector3<T>> {
        let count = |fov: T| -> u32 { ((fov / self.resolution).round().to_u32().unwrap_or(0)) + 1 };
        let yaws = angle_samples(count(self.horizontal_fov), self.horizontal_fov);
        let pitches = angle_samples(count(self.vertical_fov), self.vertical_fov);
        let mut dirs = Vec::with_capacity(yaws.len() * pitches.len());
        for &pitch in &pitches {
            for &yaw in &yaws {
                dirs.push(Vector3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin()));
            }
        }
        dirs
    }
}

/// Distance along a unit ray to the surface of `cyl`, if hit in front of the
/// origin. Rays starting inside the cylinder see nothing of it.
pub fn ray_cylinder<T: Real>(origin: &Vector3<T>, dir: &Vector3<T>, cyl: &Cylinder<T>) -> Option<T> {
    let ox = origin.x - cyl.center.x;
    let oy = origin.y - cyl.center.y;
    let r2 = cyl.radius * cyl.radius;
    let inside_disc = ox * ox + oy * oy <= r2;
    if inside_disc && origin.z >= T::zero() && origin.z <= cyl.height {
        return None;
    }
    let mut best: Option<T> = None;

    let a = dir.x * dir.x + dir.y * dir.y;
    if a > T::default_epsilon() && !inside_disc {
        let b = ox * dir.x + oy * dir.y;
        let c = ox * ox + oy * oy - r2;
        let disc = b * b - a * c;
        if disc >= T::zero() {
            let t = (-b - disc.sqrt()) / a;
            let z = origin.z + t * dir.z;
            if t >= T::zero() && z >= T::zero() && z <= cyl.height {
                best = Some(t);
            }
        }
    }

    // top cap, seen from above
    if origin.z > cyl.height && dir.z < T::zero() {
        let t = (cyl.height - origin.z) / dir.z;
        let x = ox + t * dir.x;
        let y = oy + t * dir.y;
        if x * x + y * y <= r2 && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    }
    best
}

/// Distance along a unit ray to the ground plane `z = 0`.
pub fn ray_ground<T: Real>(origin: &Vector3<T>, dir: &Vector3<T>) -> Option<T> {
    (dir.z < T::zero() && origin.z >= T::zero()).then(|| -origin.z / dir.z)
}

/// Casts every ray of the lattice from `robot_pose` and returns the hits in
/// the sensor frame.
pub fn sense<T: Real>(world: &WorldMap<T>, robot_pose: &Pose<T>, cfg: &SensorConfig<T>, stamp: T) -> PointCloud<T> {
    let rays = cfg.ray_directions();
    sense_rays(world, robot_pose, cfg, &rays, stamp)
}

/// Same as [`sense`] with precomputed ray directions.
pub fn sense_rays<T: Real>(
    world: &WorldMap<T>,
    robot_pose: &Pose<T>,
    cfg: &SensorConfig<T>,
    rays: &[Vector3<T>],
    stamp: T,
) -> PointCloud<T> {
    let origin = robot_pose.position;
    let max_range = match cfg.range {
        SensorRange::Constant(r) => r,
        SensorRange::Ellipsoid(r) => r[0].max(r[1]).max(r[2]),
    };
    // cylinders that can be reached at all
    let reach = max_range;
    let nearby: Vec<&Cylinder<T>> = world
        .obstacles
        .iter()
        .filter(|c| {
            let d = (c.center - origin.xy()).norm();
            d <= reach + c.radius
        })
        .collect();

    let mut points = Vec::new();
    for local in rays {
        let dir = robot_pose.orientation * local;
        let range = cfg.range.along(local);
        let mut hit = ray_ground(&origin, &dir);
        for cyl in &nearby {
            if let Some(t) = ray_cylinder(&origin, &dir, cyl) {
                if hit.is_none_or(|h| t < h) {
                    hit = Some(t);
                }
            }
        }
        if let Some(t) = hit.filter(|&t| t <= range) {
            points.push(CloudPoint::new(local * t, T::one()));
        }
    }
    PointCloud::new(points, stamp).expect("sensor beliefs are always 1")
}

/// Default forward-facing sensor: 90 x 60 degree field of view at one degree
/// resolution.
pub fn default_sensor<T: Real>(range: SensorRange<T>) -> SensorConfig<T> {
    SensorConfig {
        horizontal_fov: cast::<T>(90f64.to_radians()),
        vertical_fov: cast::<T>(60f64.to_radians()),
        resolution: cast::<T>(1f64.to_radians()),
        range,
        rate: cast(10.0),
    }
}
