//! Per-cycle tentacle evaluation.
//!
//! Every tentacle gets a navigability class and four scores in `[0, 1]`:
//! clearance, nearby clutter, goal closeness and smoothness. The cost is their
//! weighted sum, and the best tentacle is the cheapest one that is not
//! non-navigable.

use std::io::{self, Write};

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::RobotCenteredGrid;
use crate::pose::Pose;
use crate::scalar::{from_usize, is_finite, to_f64, Real};
use crate::tentacles::{ClassifiedVoxels, Tentacle, TentacleSet, VoxelClass, VoxelRecord};

/// Weights of the four cost terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights<T: Real> {
    pub clearance: T,
    pub clutter: T,
    pub closeness: T,
    pub smoothness: T,
}

impl<T: Real> CostWeights<T> {
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            clearance: self.clearance * factor,
            clutter: self.clutter * factor,
            closeness: self.closeness * factor,
            smoothness: self.smoothness * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicParams<T: Real> {
    /// Fraction of the tentacle length below which a blocked tentacle is
    /// non-navigable (`alpha_crash`).
    pub crash_scale: T,
    /// A navigation point is blocked when more than this many of its Priority
    /// voxels are occupied (`tau_D_err`).
    pub error_threshold: u32,
    pub weights: CostWeights<T>,
}

impl<T: Real> HeuristicParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.crash_scale > T::zero() && self.crash_scale <= T::one()) {
            return Err(Error::invalid("alpha_crash", "must lie in (0, 1]"));
        }
        let w = &self.weights;
        for (name, v) in [
            ("lambda_clear", w.clearance),
            ("lambda_clut", w.clutter),
            ("lambda_close", w.closeness),
            ("lambda_smo", w.smoothness),
        ] {
            if !(is_finite(v) && v >= T::zero()) {
                return Err(Error::invalid(name, "weight must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Navigability {
    Navigable,
    NonNavigable,
    TemporarilyNavigable,
}

impl Navigability {
    /// `1`, `0` or `-1`.
    pub fn value(self) -> i8 {
        match self {
            Navigability::Navigable => 1,
            Navigability::NonNavigable => 0,
            Navigability::TemporarilyNavigable => -1,
        }
    }
}

/// Occupancy along one tentacle for the current cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancySummary<T: Real> {
    /// Occupied Priority voxels per navigation point; `counters[k - 1]` is
    /// the count for point `k`.
    pub counters: Vec<u32>,
    /// First navigation point (from 1) whose counter exceeds the error
    /// threshold.
    pub blocked_at: Option<usize>,
    /// Distance to the first blocked point, or the tentacle length.
    pub obstacle_distance: T,
    pub length: T,
    /// Sum of all voxel weights.
    pub total_weight: T,
    /// Sum of voxel weights times occupancy belief.
    pub occupied_weight: T,
}

/// Counts occupied Priority voxels per navigation point, finds the first
/// blocked point, and accumulates the weight sums used by the clutter score.
pub fn occupancy_summary<T: Real>(
    tentacle: &Tentacle<T>,
    records: &[VoxelRecord<T>],
    grid: &RobotCenteredGrid<T>,
    error_threshold: u32,
) -> OccupancySummary<T> {
    let n = tentacle.point_count();
    let mut counters = vec![0u32; n];
    let mut total_weight = T::zero();
    let mut occupied_weight = T::zero();
    for rec in records {
        let belief = grid.belief(rec.voxel);
        total_weight += rec.weight;
        occupied_weight += rec.weight * belief;
        if rec.class == VoxelClass::Priority && belief > T::zero() {
            counters[rec.nav_index as usize - 1] += 1;
        }
    }
    let blocked_at = counters.iter().position(|&h| h > error_threshold).map(|i| i + 1);
    let obstacle_distance = match blocked_at {
        Some(k) => tentacle.length * from_usize::<T>(k) / from_usize::<T>(n),
        None => tentacle.length,
    };
    OccupancySummary { counters, blocked_at, obstacle_distance, length: tentacle.length, total_weight, occupied_weight }
}

/// Crash distance `alpha_crash * l_t`. The boundary `l_obs == tau_crash`
/// counts as temporarily navigable.
pub fn navigability<T: Real>(summary: &OccupancySummary<T>, crash_scale: T) -> Navigability {
    let crash_distance = crash_scale * summary.length;
    if summary.obstacle_distance >= summary.length {
        Navigability::Navigable
    } else if summary.obstacle_distance < crash_distance {
        Navigability::NonNavigable
    } else {
        Navigability::TemporarilyNavigable
    }
}

/// `1 - l_obs / l_t`: 0 for a clear tentacle, 1 when blocked at the origin.
pub fn clearance<T: Real>(summary: &OccupancySummary<T>) -> T {
    T::one() - summary.obstacle_distance / summary.length
}

impl<T: Real> OccupancySummary<T> {
    /// Weighted occupied fraction of the tentacle's voxels; 0 when it has
    /// none.
    pub fn clutter(&self) -> T {
        if self.total_weight > T::zero() {
            self.occupied_weight / self.total_weight
        } else {
            T::zero()
        }
    }
}

/// Nearby clutter of a voxel set read from `grid`.
pub fn clutter<T: Real>(records: &[VoxelRecord<T>], grid: &RobotCenteredGrid<T>) -> T {
    let (total, occupied) =
        records.iter().fold((T::zero(), T::zero()), |(t, o), r| (t + r.weight, o + r.weight * grid.belief(r.voxel)));
    if total > T::zero() {
        occupied / total
    } else {
        T::zero()
    }
}

/// Point of the tentacle measured against the goal.
///
/// Goals beyond the tentacle length use the first blocked point (the tip when
/// clear). Closer goals use the navigation point nearest to the goal distance
/// laid along the tentacle.
pub fn goal_point<'a, T: Real>(
    tentacle: &'a Tentacle<T>,
    summary: &OccupancySummary<T>,
    goal_distance: T,
) -> &'a Vector3<T> {
    if goal_distance > tentacle.length {
        match summary.blocked_at {
            Some(k) => tentacle.nav_point(k),
            None => tentacle.last_point(),
        }
    } else {
        let arc = goal_distance.clamp(tentacle.spacing, tentacle.length);
        let k = to_f64(arc / tentacle.spacing).round() as usize;
        tentacle.nav_point(k.clamp(1, tentacle.point_count()))
    }
}

/// Raw (unnormalized) goal closeness: world distance between the tentacle's
/// goal point and the goal.
pub fn closeness<T: Real>(
    tentacle: &Tentacle<T>,
    summary: &OccupancySummary<T>,
    robot_pose: &Pose<T>,
    goal_world: &Vector3<T>,
) -> T {
    let goal_distance = robot_pose.inverse_transform_point(goal_world).norm();
    let p = goal_point(tentacle, summary, goal_distance);
    (robot_pose.transform_point(p) - goal_world).norm()
}

/// Raw smoothness: distance between first navigation points of this tentacle
/// and the previous best. Zero when there is no previous best.
pub fn smoothness<T: Real>(tentacle: &Tentacle<T>, previous_best: Option<&Tentacle<T>>) -> T {
    previous_best.map_or_else(T::zero, |prev| (tentacle.first_point() - prev.first_point()).norm())
}

/// Divides by the maximum; all zero when the maximum is not positive.
pub fn normalize<T: Real>(values: &mut [T]) {
    let max = values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    if max > T::zero() {
        values.iter_mut().for_each(|v| *v /= max);
    } else {
        values.iter_mut().for_each(|v| *v = T::zero());
    }
}

/// One row of the evaluation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TentacleEvaluation<T: Real> {
    pub navigability: Navigability,
    pub clearance: T,
    pub clutter: T,
    pub closeness: T,
    pub smoothness: T,
    pub cost: T,
}

pub fn total_cost<T: Real>(row: &TentacleEvaluation<T>, weights: &CostWeights<T>) -> T {
    weights.clearance * row.clearance
        + weights.clutter * row.clutter
        + weights.closeness * row.closeness
        + weights.smoothness * row.smoothness
}

/// Cheapest tentacle that is navigable or temporarily navigable; ties go to
/// the lowest index.
pub fn select_best<T: Real>(rows: &[TentacleEvaluation<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (j, row) in rows.iter().enumerate() {
        if row.navigability == Navigability::NonNavigable {
            continue;
        }
        match best {
            Some((_, cost)) if !(row.cost < cost) => {}
            _ => best = Some((j, row.cost)),
        }
    }
    best.map(|(j, _)| j)
}

/// Result of evaluating every tentacle in one cycle.
#[derive(Debug, Clone)]
pub struct Evaluation<T: Real> {
    pub summaries: Vec<OccupancySummary<T>>,
    pub rows: Vec<TentacleEvaluation<T>>,
    pub best: Option<usize>,
}

impl<T: Real> Evaluation<T> {
    /// Writes `cycle j pi_nav pi_clear pi_clut pi_close pi_smo F` per tentacle.
    pub fn dump<W: Write>(&self, cycle: u64, mut out: W) -> io::Result<()> {
        for (j, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{} {} {} {:.6} {:.6} {:.6} {:.6} {:.6}",
                cycle,
                j,
                r.navigability.value(),
                to_f64(r.clearance),
                to_f64(r.clutter),
                to_f64(r.closeness),
                to_f64(r.smoothness),
                to_f64(r.cost)
            )?;
        }
        Ok(())
    }
}

/// Evaluates all tentacles against a refreshed grid.
///
/// `goal_robot` is the goal in the robot frame. Distances are frame invariant,
/// so closeness is computed there directly.
pub fn evaluate_all<T: Real>(
    set: &TentacleSet<T>,
    voxels: &ClassifiedVoxels<T>,
    grid: &RobotCenteredGrid<T>,
    goal_robot: &Vector3<T>,
    previous_best: Option<usize>,
    params: &HeuristicParams<T>,
) -> Evaluation<T> {
    let goal_distance = goal_robot.norm();
    let prev = previous_best.map(|j| set.get(j));
    let per_tentacle: Vec<(OccupancySummary<T>, TentacleEvaluation<T>)> = (0..set.len())
        .into_par_iter()
        .map(|j| {
            let t = set.get(j);
            let summary = occupancy_summary(t, voxels.tentacle(j), grid, params.error_threshold);
            let row = TentacleEvaluation {
                navigability: navigability(&summary, params.crash_scale),
                clearance: clearance(&summary),
                clutter: summary.clutter(),
                closeness: (goal_point(t, &summary, goal_distance) - goal_robot).norm(),
                smoothness: smoothness(t, prev),
                cost: T::zero(),
            };
            (summary, row)
        })
        .collect();
    let (summaries, mut rows): (Vec<_>, Vec<_>) = per_tentacle.into_iter().unzip();

    let mut close: Vec<T> = rows.iter().map(|r| r.closeness).collect();
    let mut smooth: Vec<T> = rows.iter().map(|r| r.smoothness).collect();
    normalize(&mut close);
    normalize(&mut smooth);
    for ((row, c), s) in rows.iter_mut().zip(close).zip(smooth) {
        row.closeness = c;
        row.smoothness = s;
        row.cost = total_cost(row, &params.weights);
    }
    let best = select_best(&rows);
    Evaluation { summaries, rows, best }
}
