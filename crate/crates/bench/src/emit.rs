//! Result files: per-trial CSV, per-map aggregate CSV, a JSON summary, pose
//! traces and the generated maps.
//!
//! Floats are written with 6 decimals; missing statistics are written as
//! `nan` in CSV and `null` in JSON.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tentacle_nav::sim::write_trace;

use crate::benchmark::{BenchmarkRun, MapAggregate, TrialRow};
use crate::config::MapKind;
use crate::error::BenchError;

pub const TRIALS_HEADER: &str = "map,trial,seed,outcome,duration_s,path_length_m";
pub const AGGREGATES_HEADER: &str =
    "map,trials,successes,success_rate,duration_mean_s,duration_std_s,path_length_mean_m,path_length_std_m";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6}"))
}

pub fn write_trials_csv<W: Write>(rows: &[TrialRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRIALS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            r.map,
            r.trial,
            r.seed,
            r.outcome.as_str(),
            r.duration_s,
            r.path_length_m
        )?;
    }
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(aggregates: &[MapAggregate], mut out: W) -> io::Result<()> {
    writeln!(out, "{AGGREGATES_HEADER}")?;
    for a in aggregates {
        writeln!(
            out,
            "{},{},{},{:.6},{},{},{},{}",
            a.map,
            a.trials,
            a.successes,
            a.success_rate,
            opt(a.duration_mean_s),
            opt(a.duration_std_s),
            opt(a.path_length_mean_m),
            opt(a.path_length_std_m)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MapSummary {
    map: usize,
    #[serde(rename = "type")]
    kind: MapKind,
    seed: u64,
    obstacles: Option<usize>,
    error: Option<String>,
    trials: usize,
    successes: usize,
    success_rate: f64,
    duration_mean_s: Option<f64>,
    duration_std_s: Option<f64>,
    path_length_mean_m: Option<f64>,
    path_length_std_m: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    tentacles: usize,
    voxels: u64,
    trials: usize,
    successes: usize,
    success_rate: f64,
    maps: Vec<MapSummary>,
}

/// Fixed-precision value for JSON output.
fn json6(v: f64) -> f64 {
    crate::benchmark::round6(v)
}

pub fn summary_json(run: &BenchmarkRun) -> String {
    let maps = run
        .maps
        .iter()
        .zip(&run.aggregates)
        .map(|(m, a)| MapSummary {
            map: a.map,
            kind: m.spec.kind,
            seed: m.seed,
            obstacles: m.world.as_ref().ok().map(|w| w.obstacles.len()),
            error: m.world.as_ref().err().cloned(),
            trials: a.trials,
            successes: a.successes,
            success_rate: json6(a.success_rate),
            duration_mean_s: a.duration_mean_s.map(json6),
            duration_std_s: a.duration_std_s.map(json6),
            path_length_mean_m: a.path_length_mean_m.map(json6),
            path_length_std_m: a.path_length_std_m.map(json6),
        })
        .collect();
    let summary = Summary {
        seed: run.seed,
        tentacles: run.tentacles,
        voxels: run.voxels,
        trials: run.rows.len(),
        successes: run.total_successes(),
        success_rate: json6(run.success_rate()),
        maps,
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    text
}

pub fn trace_file_name(map: usize, trial: usize) -> String {
    format!("map{map:02}_trial{trial:02}.txt")
}

pub fn map_file_name(map: usize) -> String {
    format!("map{map:02}.toml")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(path).map_err(|e| BenchError::io(path, e))
}

/// Writes all result files under `dir` and returns their paths.
pub fn emit_results(run: &BenchmarkRun, dir: &Path, traces: bool) -> Result<Vec<PathBuf>, BenchError> {
    if run.rows.is_empty() {
        return Err(BenchError::Usage("no benchmark results to write".into()));
    }
    create_dir(dir)?;
    let mut written = Vec::new();

    let mut buf = Vec::new();
    write_trials_csv(&run.rows, &mut buf).expect("writing to memory");
    let path = dir.join("trials.csv");
    write_file(&path, &buf)?;
    written.push(path);

    buf.clear();
    write_aggregates_csv(&run.aggregates, &mut buf).expect("writing to memory");
    let path = dir.join("aggregates.csv");
    write_file(&path, &buf)?;
    written.push(path);

    let path = dir.join("summary.json");
    write_file(&path, summary_json(run).as_bytes())?;
    written.push(path);

    let maps_dir = dir.join("maps");
    create_dir(&maps_dir)?;
    for (i, m) in run.maps.iter().enumerate() {
        if let Ok(world) = &m.world {
            let path = maps_dir.join(map_file_name(i));
            write_file(&path, world.to_toml().as_bytes())?;
            written.push(path);
        }
    }

    if traces {
        let traces_dir = dir.join("traces");
        create_dir(&traces_dir)?;
        for (row, trace) in run.rows.iter().zip(&run.traces) {
            if trace.is_empty() {
                continue;
            }
            buf.clear();
            write_trace(trace, &mut buf).expect("writing to memory");
            let path = traces_dir.join(trace_file_name(row.map, row.trial));
            write_file(&path, &buf)?;
            written.push(path);
        }
    }
    Ok(written)
}
