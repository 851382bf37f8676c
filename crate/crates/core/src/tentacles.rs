//! Pre-sampled linear trajectories ("tentacles") and their Support/Priority
//! voxel sets.
//!
//! Tentacles are straight rays from the robot origin, one per (yaw, pitch)
//! sample, carrying navigation points at uniform spacing. Navigation points are
//! numbered from 1: point `k` sits at arc length `k * spacing`, so the last one
//! lies at the tentacle's tip.
//!
//! Every grid voxel whose center lies within `support_threshold` of a
//! tentacle's closest navigation point gets a [`VoxelRecord`]: Priority when the
//! distance is at most `priority_threshold`, Support otherwise.

use std::io::{self, Write};

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::grid::GridConfig;
use crate::scalar::{cast, from_usize, is_finite, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentacleConfig<T: Real> {
    /// Samples in yaw (`n_phi`).
    pub yaw_samples: u32,
    /// Samples in pitch (`n_theta`).
    pub pitch_samples: u32,
    /// Total yaw angle covered, radians (`phi`).
    pub yaw_coverage: T,
    /// Total pitch angle covered, radians (`theta`).
    pub pitch_coverage: T,
    /// Upper bound on tentacle length, meters (`l_t_max`).
    pub max_length: T,
    /// Requested navigation point spacing, meters (`delta_d`).
    pub spacing: T,
    /// Priority distance threshold, meters (`tau_P`).
    pub priority_threshold: T,
    /// Support distance threshold, meters (`tau_S`).
    pub support_threshold: T,
    /// Weight of Priority voxels (`beta_max`).
    pub max_weight: T,
    /// Decay scale of Support voxel weights (`alpha_beta`).
    pub weight_decay: T,
}

impl<T: Real> TentacleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.yaw_samples == 0 {
            return Err(Error::invalid("n_phi", "at least one yaw sample is required"));
        }
        if self.pitch_samples == 0 {
            return Err(Error::invalid("n_theta", "at least one pitch sample is required"));
        }
        let positive = |v: T| is_finite(v) && v > T::zero();
        let non_negative = |v: T| is_finite(v) && v >= T::zero();
        if !non_negative(self.yaw_coverage) {
            return Err(Error::invalid("phi", "yaw coverage must be finite and >= 0"));
        }
        if !non_negative(self.pitch_coverage) || self.pitch_coverage > T::pi() {
            return Err(Error::invalid("theta", "pitch coverage must lie in [0, 180] degrees"));
        }
        if !positive(self.max_length) {
            return Err(Error::invalid("l_t_max", "must be finite and > 0"));
        }
        if !positive(self.spacing) {
            return Err(Error::invalid("delta_d", "must be finite and > 0"));
        }
        if !positive(self.priority_threshold) {
            return Err(Error::invalid("tau_P", "must be finite and > 0"));
        }
        if !(is_finite(self.support_threshold) && self.support_threshold > self.priority_threshold) {
            return Err(Error::invalid("tau_S", "tau_S must be greater than tau_P"));
        }
        if !positive(self.max_weight) {
            return Err(Error::invalid("beta_max", "must be finite and > 0"));
        }
        if !positive(self.weight_decay) {
            return Err(Error::invalid("alpha_beta", "must be finite and > 0"));
        }
        let points = to_f64(self.max_length) / to_f64(self.spacing);
        if points > f64::from(u32::MAX) {
            return Err(Error::invalid("delta_d", "too many navigation points per tentacle"));
        }
        Ok(())
    }

    /// `N_t = n_phi * n_theta`.
    pub fn tentacle_count(&self) -> usize {
        self.yaw_samples as usize * self.pitch_samples as usize
    }
}

/// Sensor range as a function of direction, used to cut tentacle lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorRange<T: Real> {
    Constant(T),
    /// Axis-aligned ellipsoid with the given per-axis ranges.
    Ellipsoid([T; 3]),
}

impl<T: Real> SensorRange<T> {
    /// Range along unit direction `dir`.
    pub fn along(&self, dir: &Vector3<T>) -> T {
        match *self {
            SensorRange::Constant(r) => r,
            SensorRange::Ellipsoid(r) => {
                let s = (dir.x / r[0]).powi(2) + (dir.y / r[1]).powi(2) + (dir.z / r[2]).powi(2);
                T::one() / s.sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tentacle<T: Real> {
    pub yaw: T,
    pub pitch: T,
    /// Tentacle length `l_t`, meters.
    pub length: T,
    /// Actual distance between consecutive navigation points.
    pub spacing: T,
    /// Unit direction in the robot frame.
    pub direction: Vector3<T>,
    nav_points: Vec<Vector3<T>>,
}

impl<T: Real> Tentacle<T> {
    fn new(yaw: T, pitch: T, length: T, requested_spacing: T) -> Self {
        let direction = direction_of(yaw, pitch);
        let ratio = to_f64(length) / to_f64(requested_spacing);
        let count = ((ratio - 1e-9).ceil() as usize).max(1);
        let spacing = length / from_usize(count);
        let nav_points = (1..=count).map(|k| direction * (from_usize::<T>(k) * spacing)).collect();
        Self { yaw, pitch, length, spacing, direction, nav_points }
    }

    /// `n_s`.
    pub fn point_count(&self) -> usize {
        self.nav_points.len()
    }

    pub fn nav_points(&self) -> &[Vector3<T>] {
        &self.nav_points
    }

    /// Navigation point `k`, numbered from 1.
    #[inline]
    pub fn nav_point(&self, k: usize) -> &Vector3<T> {
        &self.nav_points[k - 1]
    }

    pub fn first_point(&self) -> &Vector3<T> {
        &self.nav_points[0]
    }

    pub fn last_point(&self) -> &Vector3<T> {
        self.nav_points.last().expect("tentacles have at least one point")
    }

    /// Closest navigation point to `p` as `(k, distance)`. Ties go to the
    /// lower index.
    pub fn closest_point(&self, p: &Vector3<T>) -> (usize, T) {
        let n = self.nav_points.len();
        let t = to_f64(p.dot(&self.direction) / self.spacing);
        let guess = (t.round().max(1.0) as usize).min(n);
        let lo = guess.saturating_sub(1).max(1);
        let hi = (guess + 1).min(n);
        let mut best = (lo, (p - self.nav_point(lo)).norm());
        for k in lo + 1..=hi {
            let d = (p - self.nav_point(k)).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }
}

fn direction_of<T: Real>(yaw: T, pitch: T) -> Vector3<T> {
    Vector3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin())
}

/// Uniform samples over `[-coverage/2, coverage/2]`, endpoints included; a
/// single sample sits at 0.
pub fn angle_samples<T: Real>(count: u32, coverage: T) -> Vec<T> {
    if count <= 1 {
        return vec![T::zero(); count as usize];
    }
    let half = coverage * cast::<T>(0.5);
    let step = coverage / T::from_u32(count - 1).unwrap();
    (0..count).map(|i| -half + step * T::from_u32(i).unwrap()).collect()
}

/// The tentacle set `Q`. Index `j = pitch_index * n_phi + yaw_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct TentacleSet<T: Real> {
    tentacles: Vec<Tentacle<T>>,
}

impl<T: Real> TentacleSet<T> {
    pub fn from_tentacles(tentacles: Vec<Tentacle<T>>) -> Self {
        Self { tentacles }
    }

    pub fn len(&self) -> usize {
        self.tentacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tentacles.is_empty()
    }

    pub fn get(&self, j: usize) -> &Tentacle<T> {
        &self.tentacles[j]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tentacle<T>> {
        self.tentacles.iter()
    }

    /// Total navigation points `N_s` over all tentacles.
    pub fn total_points(&self) -> usize {
        self.tentacles.iter().map(Tentacle::point_count).sum()
    }
}

impl<'a, T: Real> IntoIterator for &'a TentacleSet<T> {
    type Item = &'a Tentacle<T>;
    type IntoIter = std::slice::Iter<'a, Tentacle<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.tentacles.iter()
    }
}

/// Generates `n_phi * n_theta` tentacles. Each one is as long as the sensor
/// reaches along its direction, capped at `max_length`.
pub fn sample_tentacles<T: Real>(cfg: &TentacleConfig<T>, range: impl Fn(&Vector3<T>) -> T) -> Result<TentacleSet<T>> {
    cfg.validate()?;
    let yaws = angle_samples(cfg.yaw_samples, cfg.yaw_coverage);
    let pitches = angle_samples(cfg.pitch_samples, cfg.pitch_coverage);
    let mut tentacles = Vec::with_capacity(cfg.tentacle_count());
    for &pitch in &pitches {
        for &yaw in &yaws {
            let reach = range(&direction_of(yaw, pitch));
            if !(is_finite(reach) && reach > T::zero()) {
                return Err(Error::invalid(
                    "rho",
                    format!("sensor range must be positive along every tentacle, got {}", to_f64(reach)),
                ));
            }
            let length = reach.min(cfg.max_length);
            tentacles.push(Tentacle::new(yaw, pitch, length, cfg.spacing));
        }
    }
    Ok(TentacleSet { tentacles })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoxelClass {
    Support = 0,
    Priority = 1,
}

/// Classified voxel `(o, beta, m, c)` of one tentacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelRecord<T: Real> {
    /// Weight `beta`.
    pub weight: T,
    /// Grid linear index `o`.
    pub voxel: u32,
    /// Closest navigation point `m`, numbered from 1.
    pub nav_index: u32,
    pub class: VoxelClass,
}

/// Weight of a voxel at distance `d` from its closest navigation point.
///
/// # Panics
///
/// Panics for a Support voxel with `d <= tau_P`; such a voxel should have
/// been classified Priority.
pub fn occupancy_weight<T: Real>(class: VoxelClass, d: T, cfg: &TentacleConfig<T>) -> T {
    match class {
        VoxelClass::Priority => cfg.max_weight,
        VoxelClass::Support => {
            assert!(
                d > cfg.priority_threshold,
                "support voxel at distance {} is within tau_P {}",
                to_f64(d),
                to_f64(cfg.priority_threshold)
            );
            cfg.max_weight / (cfg.weight_decay * d)
        }
    }
}

/// Classification from the distance to the closest navigation point.
#[inline]
pub fn classify<T: Real>(d: T, cfg: &TentacleConfig<T>) -> Option<VoxelClass> {
    if d <= cfg.priority_threshold {
        Some(VoxelClass::Priority)
    } else if d <= cfg.support_threshold {
        Some(VoxelClass::Support)
    } else {
        None
    }
}

/// Support and Priority voxels of every tentacle (the set `Upsilon`).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedVoxels<T: Real> {
    per_tentacle: Vec<Vec<VoxelRecord<T>>>,
}

impl<T: Real> ClassifiedVoxels<T> {
    pub fn from_records(per_tentacle: Vec<Vec<VoxelRecord<T>>>) -> Self {
        Self { per_tentacle }
    }

    /// Records of tentacle `j`, sorted by voxel index.
    pub fn tentacle(&self, j: usize) -> &[VoxelRecord<T>] {
        &self.per_tentacle[j]
    }

    pub fn tentacle_count(&self) -> usize {
        self.per_tentacle.len()
    }

    pub fn total_records(&self) -> usize {
        self.per_tentacle.iter().map(Vec::len).sum()
    }

    /// Sorted, deduplicated voxel indices referenced by any tentacle.
    pub fn active_voxels(&self, grid: &GridConfig<T>) -> Vec<u32> {
        let mut used = vec![false; grid.voxel_count() as usize];
        for rec in self.per_tentacle.iter().flatten() {
            used[rec.voxel as usize] = true;
        }
        used.iter().enumerate().filter_map(|(o, &u)| u.then_some(o as u32)).collect()
    }

    /// Writes one `j o beta m c` record per line.
    pub fn export<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (j, records) in self.per_tentacle.iter().enumerate() {
            for r in records {
                writeln!(out, "{} {} {:.6} {} {}", j, r.voxel, to_f64(r.weight), r.nav_index, r.class as u8)?;
            }
        }
        Ok(())
    }
}

/// Classifies, for every tentacle, the grid voxels near its navigation points.
///
/// Each voxel is visited from the neighborhood of every navigation point it
/// is within `tau_S` of, and kept only from the one that is its closest point,
/// so the work per tentacle is proportional to `n_s * (2 tau_S / d_v)^3`
/// rather than to `N_v`.
pub fn extract_support_priority<T: Real>(
    set: &TentacleSet<T>,
    cfg: &TentacleConfig<T>,
    grid: &GridConfig<T>,
) -> Result<ClassifiedVoxels<T>> {
    cfg.validate()?;
    grid.validate()?;
    let per_tentacle = set.iter().map(|t| tentacle_voxels(t, cfg, grid)).collect();
    Ok(ClassifiedVoxels { per_tentacle })
}

fn tentacle_voxels<T: Real>(
    tentacle: &Tentacle<T>,
    cfg: &TentacleConfig<T>,
    grid: &GridConfig<T>,
) -> Vec<VoxelRecord<T>> {
    let reach = cfg.support_threshold;
    let mut records = Vec::new();
    for k in 1..=tentacle.point_count() {
        let p = tentacle.nav_point(k);
        let Some((lo, hi)) = voxel_range(grid, &(p - Vector3::repeat(reach)), &(p + Vector3::repeat(reach))) else {
            continue;
        };
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    let c = grid.center_of_coords([x, y, z]);
                    if (c - p).norm() > reach {
                        continue;
                    }
                    let (m, d) = tentacle.closest_point(&c);
                    if m != k {
                        continue;
                    }
                    if let Some(class) = classify(d, cfg) {
                        records.push(VoxelRecord {
                            weight: occupancy_weight(class, d, cfg),
                            voxel: grid.index_of_coords([x, y, z]),
                            nav_index: m as u32,
                            class,
                        });
                    }
                }
            }
        }
    }
    records.sort_unstable_by_key(|r| r.voxel);
    records
}

/// Inclusive voxel coordinate box covering `[lo, hi]`, clipped to the grid.
fn voxel_range<T: Real>(grid: &GridConfig<T>, lo: &Vector3<T>, hi: &Vector3<T>) -> Option<([u32; 3], [u32; 3])> {
    let mut a = [0u32; 3];
    let mut b = [0u32; 3];
    for axis in 0..3 {
        let half = i64::from(grid.dims[axis] / 2);
        let n = i64::from(grid.dims[axis]);
        let l = (lo[axis] / grid.voxel_size).floor().to_i64()?.saturating_add(half).max(0);
        let h = (hi[axis] / grid.voxel_size).floor().to_i64()?.saturating_add(half).min(n - 1);
        if l > h {
            return None;
        }
        a[axis] = l as u32;
        b[axis] = h as u32;
    }
    Some((a, b))
}
