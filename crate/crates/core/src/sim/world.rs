//! Ground-truth worlds made of vertical cylinders standing on the ground
//! plane `z = 0`.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder<T: Real> {
    pub center: Vector2<T>,
    pub radius: T,
    pub height: T,
}

/// Axis-aligned rectangle in the xy plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T: Real> {
    pub min: Vector2<T>,
    pub max: Vector2<T>,
}

impl<T: Real> Bounds<T> {
    pub fn new(min: Vector2<T>, max: Vector2<T>) -> Self {
        Self { min, max }
    }

    pub fn square(side: T) -> Self {
        Self::new(Vector2::zeros(), Vector2::new(side, side))
    }

    pub fn size(&self) -> Vector2<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vector2<T> {
        (self.min + self.max) * cast::<T>(0.5)
    }

    fn contains_disc(&self, c: &Vector2<T>, r: T) -> bool {
        c.x - r >= self.min.x && c.x + r <= self.max.x && c.y - r >= self.min.y && c.y + r <= self.max.y
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap<T: Real> {
    pub obstacles: Vec<Cylinder<T>>,
    pub bounds: Bounds<T>,
    /// Seed the map was generated from.
    pub seed: u64,
}

impl<T: Real> WorldMap<T> {
    pub fn empty(bounds: Bounds<T>) -> Self {
        Self { obstacles: Vec::new(), bounds, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.obstacles.iter().enumerate() {
            if !(c.radius > T::zero() && c.height > T::zero()) {
                return Err(Error::MapFormat(format!("obstacle {i} has non-positive radius or height")));
            }
            if !self.bounds.contains_disc(&c.center, c.radius) {
                return Err(Error::MapFormat(format!("obstacle {i} lies outside the map bounds")));
            }
        }
        Ok(())
    }

    pub fn min_radius(&self) -> Option<T> {
        self.obstacles.iter().map(|c| c.radius).reduce(|a, b| a.min(b))
    }

    /// Serializes to the TOML map file format.
    pub fn to_toml(&self) -> String {
        let file = MapFile {
            seed: self.seed,
            bounds: [
                to_f64(self.bounds.min.x),
                to_f64(self.bounds.min.y),
                to_f64(self.bounds.max.x),
                to_f64(self.bounds.max.y),
            ],
            obstacles: self
                .obstacles
                .iter()
                .map(|c| ObstacleRecord {
                    x: to_f64(c.center.x),
                    y: to_f64(c.center.y),
                    radius: to_f64(c.radius),
                    height: to_f64(c.height),
                })
                .collect(),
        };
        toml::to_string(&file).expect("map file serialization cannot fail")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: MapFile = toml::from_str(text).map_err(|e| Error::MapFormat(e.to_string()))?;
        let [x0, y0, x1, y1] = file.bounds;
        let map = Self {
            seed: file.seed,
            bounds: Bounds::new(Vector2::new(cast(x0), cast(y0)), Vector2::new(cast(x1), cast(y1))),
            obstacles: file
                .obstacles
                .iter()
                .map(|o| Cylinder {
                    center: Vector2::new(cast(o.x), cast(o.y)),
                    radius: cast(o.radius),
                    height: cast(o.height),
                })
                .collect(),
        };
        map.validate()?;
        Ok(map)
    }
}

/// On-disk map: `seed`, `bounds = [x_min, y_min, x_max, y_max]` and one
/// `[[obstacles]]` table per cylinder.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    seed: u64,
    bounds: [f64; 4],
    #[serde(default)]
    obstacles: Vec<ObstacleRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleRecord {
    x: f64,
    y: f64,
    radius: f64,
    height: f64,
}

/// Disc that generated obstacles must stay clear of (start and goal areas).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeepOut<T: Real> {
    pub center: Vector2<T>,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderMapParams<T: Real> {
    pub side: T,
    pub count: usize,
    pub radius_range: (T, T),
    pub height: T,
    /// Minimum surface-to-surface gap between cylinders; at least the robot
    /// footprint diagonal.
    pub clearance: T,
    pub keep_out: Vec<KeepOut<T>>,
}

impl<T: Real> Default for CylinderMapParams<T> {
    fn default() -> Self {
        Self {
            side: cast(20.0),
            count: 25,
            radius_range: (cast(0.25), cast(0.5)),
            height: cast(5.0),
            clearance: cast(0.6),
            keep_out: Vec::new(),
        }
    }
}

/// Trees are cylinders with random radius and height.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams<T: Real> {
    pub radius_range: (T, T),
    pub height_range: (T, T),
    /// Minimum center-to-center distance between trees.
    pub separation: T,
    pub keep_out: Vec<KeepOut<T>>,
}

impl<T: Real> Default for ForestParams<T> {
    fn default() -> Self {
        Self {
            radius_range: (cast(0.1), cast(0.3)),
            height_range: (cast(4.0), cast(8.0)),
            separation: cast(1.0),
            keep_out: Vec::new(),
        }
    }
}

const ATTEMPTS_PER_OBSTACLE: usize = 10_000;

fn sample_range<T: Real>(rng: &mut ChaCha8Rng, (lo, hi): (T, T)) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * cast::<T>(u)
}

fn place<T: Real>(
    rng: &mut ChaCha8Rng,
    bounds: &Bounds<T>,
    count: usize,
    radius_range: (T, T),
    height_range: (T, T),
    keep_out: &[KeepOut<T>],
    conflicts: impl Fn(&Cylinder<T>, &Cylinder<T>) -> bool,
) -> Result<Vec<Cylinder<T>>> {
    let mut placed: Vec<Cylinder<T>> = Vec::with_capacity(count);
    for i in 0..count {
        let mut ok = false;
        for _ in 0..ATTEMPTS_PER_OBSTACLE {
            let radius = sample_range(rng, radius_range);
            let height = sample_range(rng, height_range);
            let lo = bounds.min.add_scalar(radius);
            let hi = bounds.max.add_scalar(-radius);
            if lo.x > hi.x || lo.y > hi.y {
                return Err(Error::Generation("obstacle radius exceeds map bounds".into()));
            }
            let center = Vector2::new(sample_range(rng, (lo.x, hi.x)), sample_range(rng, (lo.y, hi.y)));
            let candidate = Cylinder { center, radius, height };
            let blocked = keep_out.iter().any(|k| (k.center - center).norm() < k.radius + radius)
                || placed.iter().any(|c| conflicts(c, &candidate));
            if !blocked {
                placed.push(candidate);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Generation(format!(
                "could not place obstacle {} of {count} after {ATTEMPTS_PER_OBSTACLE} attempts",
                i + 1
            )));
        }
    }
    Ok(placed)
}

/// Square field of cylinders with a minimum gap between any two of them.
pub fn generate_cylinder_map<T: Real>(seed: u64, params: &CylinderMapParams<T>) -> Result<WorldMap<T>> {
    let bounds = Bounds::square(params.side);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clearance = params.clearance;
    let obstacles = place(
        &mut rng,
        &bounds,
        params.count,
        params.radius_range,
        (params.height, params.height),
        &params.keep_out,
        |a, b| (a.center - b.center).norm() < a.radius + b.radius + clearance,
    )?;
    Ok(WorldMap { obstacles, bounds, seed })
}

/// Square forest of `round(area * density)` trees.
pub fn generate_forest_map<T: Real>(area: T, density: T, seed: u64) -> Result<WorldMap<T>> {
    generate_forest_map_with(area, density, seed, &ForestParams::default())
}

pub fn generate_forest_map_with<T: Real>(
    area: T,
    density: T,
    seed: u64,
    params: &ForestParams<T>,
) -> Result<WorldMap<T>> {
    if !(area > T::zero()) {
        return Err(Error::invalid("area", "forest area must be > 0"));
    }
    if !(density >= T::zero()) {
        return Err(Error::invalid("density", "tree density must be >= 0"));
    }
    let count = to_f64(area * density).round() as usize;
    let bounds = Bounds::square(area.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let separation = params.separation;
    let obstacles =
        place(&mut rng, &bounds, count, params.radius_range, params.height_range, &params.keep_out, |a, b| {
            (a.center - b.center).norm() < separation
        })?;
    Ok(WorldMap { obstacles, bounds, seed })
}
