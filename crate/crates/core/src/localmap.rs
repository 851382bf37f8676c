//! Bounded world-frame occupancy map fed by belief-tagged point clouds.
//!
//! Cells are cubes of edge `resolution` keyed by their integer world
//! coordinate. A re-observed cell takes the newest belief, so the map state
//! depends on where points fell and not on the order clouds arrived in.
//! Cells never observed read as free (belief 0).

use std::io::{self, Write};

use nalgebra::Vector3;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::pose::Pose;
use crate::scalar::{cast, is_finite, to_f64, Real};

/// One sensed point: sensor-frame position and occupancy belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint<T: Real> {
    pub position: Vector3<T>,
    pub belief: T,
}

impl<T: Real> CloudPoint<T> {
    pub fn new(position: Vector3<T>, belief: T) -> Self {
        Self { position, belief }
    }
}

/// Point cloud stamped with simulation time (seconds).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud<T: Real> {
    points: Vec<CloudPoint<T>>,
    pub stamp: T,
}

impl<T: Real> PointCloud<T> {
    /// Fails if any belief lies outside `[0, 1]`.
    pub fn new(points: Vec<CloudPoint<T>>, stamp: T) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| !(p.belief >= T::zero() && p.belief <= T::one())) {
            return Err(Error::invalid("rho_m", format!("point belief {} outside [0, 1]", to_f64(bad.belief))));
        }
        Ok(Self { points, stamp })
    }

    pub fn empty(stamp: T) -> Self {
        Self { points: Vec::new(), stamp }
    }

    pub fn points(&self) -> &[CloudPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

type CellKey = [i32; 3];

#[derive(Debug, Clone)]
pub struct OccupancyMap<T: Real> {
    resolution: T,
    bound_radius: T,
    cells: FxHashMap<CellKey, T>,
    last_prune_center: Option<Vector3<T>>,
}

impl<T: Real> OccupancyMap<T> {
    pub fn new(resolution: T, bound_radius: T) -> Result<Self> {
        if !(is_finite(resolution) && resolution > T::zero()) {
            return Err(Error::invalid("map_resolution", "must be finite and > 0"));
        }
        if !(bound_radius > T::zero()) {
            return Err(Error::invalid("map_bound_radius", "must be > 0"));
        }
        Ok(Self { resolution, bound_radius, cells: FxHashMap::default(), last_prune_center: None })
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn bound_radius(&self) -> T {
        self.bound_radius
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn last_prune_center(&self) -> Option<&Vector3<T>> {
        self.last_prune_center.as_ref()
    }

    #[inline]
    fn key(&self, p: &Vector3<T>) -> Option<CellKey> {
        let mut key = [0i32; 3];
        for axis in 0..3 {
            key[axis] = (p[axis] / self.resolution).floor().to_i32()?;
        }
        Some(key)
    }

    fn cell_center(&self, key: &CellKey) -> Vector3<T> {
        let half = cast::<T>(0.5);
        Vector3::from_fn(|axis, _| (T::from_i32(key[axis]).unwrap() + half) * self.resolution)
    }

    /// Transforms every point into the world frame with `sensor_pose` and
    /// stores its belief in the containing cell, overwriting older values.
    pub fn insert_cloud(&mut self, cloud: &PointCloud<T>, sensor_pose: &Pose<T>) {
        for point in cloud.points() {
            let world = sensor_pose.transform_point(&point.position);
            if let Some(key) = self.key(&world) {
                self.cells.insert(key, point.belief);
            }
        }
    }

    /// Belief of the cell containing `world_p`, 0 when unobserved.
    #[inline]
    pub fn query(&self, world_p: &Vector3<T>) -> T {
        self.key(world_p).and_then(|k| self.cells.get(&k).copied()).unwrap_or_else(T::zero)
    }

    /// Drops every cell whose center is farther than `bound_radius` from
    /// `center`.
    pub fn prune(&mut self, center: &Vector3<T>) {
        let r2 = self.bound_radius * self.bound_radius;
        let res = self.resolution;
        let half = cast::<T>(0.5);
        self.cells.retain(|key, _| {
            let c = Vector3::from_fn(|axis, _| (T::from_i32(key[axis]).unwrap() + half) * res);
            (c - center).norm_squared() <= r2
        });
        self.last_prune_center = Some(*center);
    }

    /// Cells sorted by key as `(center, belief)`.
    pub fn cells_sorted(&self) -> Vec<(Vector3<T>, T)> {
        let mut keys: Vec<_> = self.cells.iter().map(|(k, &b)| (*k, b)).collect();
        keys.sort_unstable_by_key(|(k, _)| *k);
        keys.into_iter().map(|(k, b)| (self.cell_center(&k), b)).collect()
    }

    /// Writes one `x y z belief` line per cell, sorted, six decimals.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (c, b) in self.cells_sorted() {
            writeln!(out, "{:.6} {:.6} {:.6} {:.6}", to_f64(c.x), to_f64(c.y), to_f64(c.z), to_f64(b))?;
        }
        Ok(())
    }
}
