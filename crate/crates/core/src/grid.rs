//! Robot-centered voxel lattice.
//!
//! The grid is fixed to the robot frame and centered on the robot origin. Each
//! voxel has a linear index `o = o_x + o_y * n_x + o_z * n_x * n_y`, where the
//! per-axis index is `n_axis / 2 + floor(coord / voxel_size)`. Two flat arrays
//! of length `N_v` hold the voxel centers and the occupancy belief read back
//! from the local map on each cycle.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::localmap::OccupancyMap;
use crate::pose::Pose;
use crate::scalar::{cast, is_finite, Real};

/// Voxel size and per-axis voxel counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig<T: Real> {
    /// Edge length of a cubic voxel, meters.
    pub voxel_size: T,
    /// Voxel counts along x, y, z. Always even.
    pub dims: [u32; 3],
}

impl<T: Real> GridConfig<T> {
    pub fn new(voxel_size: T, dims: [u32; 3]) -> Result<Self> {
        let cfg = Self { voxel_size, dims };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same voxel count on every axis.
    pub fn cubic(voxel_size: T, n: u32) -> Result<Self> {
        Self::new(voxel_size, [n, n, n])
    }

    pub fn validate(&self) -> Result<()> {
        if !(is_finite(self.voxel_size) && self.voxel_size > T::zero()) {
            return Err(Error::invalid("d_v", "voxel size must be finite and > 0"));
        }
        const NAMES: [&str; 3] = ["n_v_x", "n_v_y", "n_v_z"];
        for (name, &n) in NAMES.iter().zip(&self.dims) {
            if n == 0 || n % 2 != 0 {
                return Err(Error::invalid(name, format!("voxel count must be even and >= 2, got {n}")));
            }
        }
        if self.voxel_count() > u64::from(u32::MAX) {
            return Err(Error::invalid(
                "n_v",
                format!("total voxel count {} exceeds u32 indexing", self.voxel_count()),
            ));
        }
        Ok(())
    }

    /// `N_v = n_x * n_y * n_z`.
    pub fn voxel_count(&self) -> u64 {
        self.dims.iter().map(|&n| u64::from(n)).product()
    }

    /// Grid width, length and height in meters.
    pub fn extent(&self) -> Vector3<T> {
        Vector3::from_fn(|axis, _| self.voxel_size * T::from_u32(self.dims[axis]).unwrap())
    }

    /// Length of the grid's space diagonal, meters.
    pub fn diagonal(&self) -> T {
        self.extent().norm()
    }

    /// Per-axis voxel coordinate of a robot-frame position, absent when outside
    /// the grid.
    #[inline]
    pub fn voxel_coords(&self, p: &Vector3<T>) -> Option<[u32; 3]> {
        let mut out = [0u32; 3];
        for axis in 0..3 {
            let cell = (p[axis] / self.voxel_size).floor().to_i64()?;
            let half = i64::from(self.dims[axis] / 2);
            let idx = half.checked_add(cell)?;
            if idx < 0 || idx >= i64::from(self.dims[axis]) {
                return None;
            }
            out[axis] = idx as u32;
        }
        Some(out)
    }

    #[inline]
    pub fn index_of_coords(&self, c: [u32; 3]) -> u32 {
        c[0] + c[1] * self.dims[0] + c[2] * self.dims[0] * self.dims[1]
    }

    #[inline]
    pub fn coords_of_index(&self, o: u32) -> [u32; 3] {
        let nx = self.dims[0];
        let nxy = nx * self.dims[1];
        [o % nx, (o % nxy) / nx, o / nxy]
    }

    /// Linear index of the voxel containing robot-frame point `p`.
    #[inline]
    pub fn linear_index(&self, p: &Vector3<T>) -> Option<u32> {
        self.voxel_coords(p).map(|c| self.index_of_coords(c))
    }

    /// Robot-frame center of the voxel with per-axis coordinates `c`.
    #[inline]
    pub fn center_of_coords(&self, c: [u32; 3]) -> Vector3<T> {
        let half = cast::<T>(0.5);
        Vector3::from_fn(|axis, _| {
            let offset = i64::from(c[axis]) - i64::from(self.dims[axis] / 2);
            self.voxel_size * (T::from_i64(offset).unwrap() + half)
        })
    }

    /// Robot-frame center of voxel `o`.
    ///
    /// # Panics
    ///
    /// Panics if `o >= N_v`.
    #[inline]
    pub fn voxel_center(&self, o: u32) -> Vector3<T> {
        assert!(u64::from(o) < self.voxel_count(), "voxel index {o} out of range for {} voxels", self.voxel_count());
        self.center_of_coords(self.coords_of_index(o))
    }
}

/// Voxel centers (`positions`) and occupancy beliefs (`occupancy`) for every
/// voxel of a [`GridConfig`].
#[derive(Debug, Clone)]
pub struct RobotCenteredGrid<T: Real> {
    config: GridConfig<T>,
    positions: Vec<Vector3<T>>,
    occupancy: Vec<T>,
}

impl<T: Real> RobotCenteredGrid<T> {
    /// Allocates both arrays, fills the position array with voxel centers and
    /// zeroes the occupancy array.
    pub fn new(config: GridConfig<T>) -> Result<Self> {
        config.validate()?;
        let count = config.voxel_count();
        let alloc_err = || Error::Allocation { voxels: count };
        let n = usize::try_from(count).map_err(|_| alloc_err())?;

        let mut positions = Vec::new();
        positions.try_reserve_exact(n).map_err(|_| alloc_err())?;
        let mut occupancy = Vec::new();
        occupancy.try_reserve_exact(n).map_err(|_| alloc_err())?;

        let [nx, ny, nz] = config.dims;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    positions.push(config.center_of_coords([x, y, z]));
                }
            }
        }
        occupancy.resize(n, T::zero());
        Ok(Self { config, positions, occupancy })
    }

    pub fn config(&self) -> &GridConfig<T> {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<T>] {
        &self.positions
    }

    pub fn occupancy(&self) -> &[T] {
        &self.occupancy
    }

    #[inline]
    pub fn position(&self, o: u32) -> &Vector3<T> {
        &self.positions[o as usize]
    }

    #[inline]
    pub fn belief(&self, o: u32) -> T {
        self.occupancy[o as usize]
    }

    /// Overwrites a single belief, clamped into `[0, 1]`.
    pub fn set_belief(&mut self, o: u32, belief: T) {
        self.occupancy[o as usize] = belief.clamp(T::zero(), T::one());
    }

    /// Zeroes every belief.
    pub fn clear(&mut self) {
        self.occupancy.iter_mut().for_each(|b| *b = T::zero());
    }

    /// Re-reads the belief of each listed voxel from `map` at the voxel
    /// center transformed into the world frame by `robot_pose`.
    pub fn refresh_occupancy(&mut self, robot_pose: &Pose<T>, map: &OccupancyMap<T>, voxels: &[u32]) {
        for &o in voxels {
            let world = robot_pose.transform_point(&self.positions[o as usize]);
            self.occupancy[o as usize] = map.query(&world);
        }
    }

    /// Refreshes every voxel of the grid.
    pub fn refresh_all(&mut self, robot_pose: &Pose<T>, map: &OccupancyMap<T>) {
        for (p, rho) in self.positions.iter().zip(self.occupancy.iter_mut()) {
            *rho = map.query(&robot_pose.transform_point(p));
        }
    }
}
