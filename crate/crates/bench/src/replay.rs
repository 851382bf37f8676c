//! Re-checks a recorded pose trace against a map for collisions.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use tentacle_nav::sim::{check_collision, path_length, read_trace, RobotModel, TraceRecord, WorldMap};

use crate::error::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub records: usize,
    /// Indices of records whose pose collides.
    pub collisions: Vec<usize>,
    pub first_collision_time: Option<f64>,
    pub path_length: f64,
    pub duration: f64,
}

pub fn replay(trace: &[TraceRecord<f64>], world: &WorldMap<f64>, robot: &RobotModel<f64>) -> ReplayReport {
    let collisions: Vec<usize> =
        trace.iter().enumerate().filter(|(_, r)| check_collision(world, &r.pose, robot)).map(|(i, _)| i).collect();
    ReplayReport {
        records: trace.len(),
        first_collision_time: collisions.first().map(|&i| trace[i].time),
        collisions,
        path_length: path_length(trace),
        duration: trace.last().map_or(0.0, |r| r.time),
    }
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord<f64>>, BenchError> {
    let file = File::open(path).map_err(|e| BenchError::io(path, e))?;
    read_trace(BufReader::new(file)).map_err(|e| match e {
        tentacle_nav::Error::Io(io) => BenchError::io(path, io),
        other => BenchError::Parse(format!("{}: {other}", path.display())),
    })
}

pub fn load_map(path: &Path) -> Result<WorldMap<f64>, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    WorldMap::from_toml(&text).map_err(|e| BenchError::Parse(format!("{}: {e}", path.display())))
}

/// Map written next to a benchmark trace: `traces/mapNN_trialTT.txt` pairs
/// with `maps/mapNN.toml`.
pub fn sibling_map(trace: &Path) -> Option<PathBuf> {
    let name = trace.file_name()?.to_str()?;
    let map = name.split('_').next().filter(|m| m.starts_with("map"))?;
    let dir = trace.parent()?.parent()?;
    Some(dir.join("maps").join(format!("{map}.toml")))
}
