use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tentacle_bench::benchmark::{generate_map, run_benchmark};
use tentacle_bench::config::{Config, MapKind, MapSpec};
use tentacle_bench::emit::emit_results;
use tentacle_bench::replay::{load_map, load_trace, replay, sibling_map};
use tentacle_bench::timing::{run_timing, write_timing_csv};
use tentacle_bench::{BenchError, OUTPUT_DIR_ENV};

/// Benchmarks and timing probes for tentacle-based reactive navigation.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every configured map and trial and write the result files.
    Run {
        config: PathBuf,
        /// Overrides the configured global seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measure initialization and main-loop phase times.
    Timing {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Map utilities.
    Map {
        #[command(subcommand)]
        command: MapCommand,
    },
    /// Re-check a pose trace against a map for collisions.
    Replay {
        trace: PathBuf,
        /// Map file; defaults to the map written next to a benchmark trace.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Config providing the robot dimensions.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum MapCommand {
    /// Generate a map file.
    Gen {
        /// forest, cylinders or empty.
        kind: String,
        seed: u64,
        out: PathBuf,
        /// Square area, m^2 (forest and empty).
        #[arg(long, default_value_t = 100.0)]
        area: f64,
        /// Obstacles per m^2 (forest).
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        /// Number of cylinders (cylinders).
        #[arg(long, default_value_t = 25)]
        count: u32,
    },
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<Config, BenchError> {
    let mut cfg = Config::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn output_dir(cfg: &Config) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.2}"))
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run { config, seed } => {
            let cfg = load_config(&config, seed)?;
            let result = run_benchmark(&cfg)?;
            let dir = output_dir(&cfg);
            emit_results(&result, &dir, cfg.benchmark.write_traces)?;
            println!("map  trials  success  duration_s (mean±std)  path_m (mean±std)");
            for a in &result.aggregates {
                println!(
                    "{:>3}  {:>6}  {:>7.2}  {:>10} ± {:<8}  {:>7} ± {:<6}",
                    a.map,
                    a.trials,
                    a.success_rate,
                    fmt_opt(a.duration_mean_s),
                    fmt_opt(a.duration_std_s),
                    fmt_opt(a.path_length_mean_m),
                    fmt_opt(a.path_length_std_m)
                );
            }
            println!(
                "overall: {}/{} successes ({:.1}%), results in {}",
                result.total_successes(),
                result.rows.len(),
                100.0 * result.success_rate(),
                dir.display()
            );
        }
        Command::Timing { config, seed } => {
            let cfg = load_config(&config, seed)?;
            let reports = run_timing(&cfg)?;
            let dir = output_dir(&cfg);
            std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
            let mut csv = Vec::new();
            write_timing_csv(&reports, &mut csv).expect("writing to memory");
            let path = dir.join("timing.csv");
            std::fs::write(&path, &csv).map_err(|e| BenchError::io(&path, e))?;
            let path = dir.join("timing.json");
            let json = serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n";
            std::fs::write(&path, json).map_err(|e| BenchError::io(&path, e))?;
            for r in &reports {
                println!(
                    "{}: N_v={} N_t={} init {:.3}s + {:.3}s | map {:.3} ms, occ+heur {:.3} ms, select {:.4} ms, next {:.4} ms = {:.3} ms ({:.1} Hz)",
                    r.label,
                    r.voxels,
                    r.tentacles,
                    r.array_init_s,
                    r.tentacle_init_s,
                    r.map_update_ms,
                    r.occupancy_heuristics_ms,
                    r.selection_ms,
                    r.next_pose_ms,
                    r.total_ms,
                    r.loop_rate_hz()
                );
            }
        }
        Command::Map { command: MapCommand::Gen { kind, seed, out, area, density, count } } => {
            let kind: MapKind = kind.parse()?;
            let spec = MapSpec { kind, area, density, count, ..MapSpec::default() };
            let world = generate_map(&spec, seed, &Config::default())?;
            std::fs::write(&out, world.to_toml()).map_err(|e| BenchError::io(&out, e))?;
            println!("{} obstacles written to {}", world.obstacles.len(), out.display());
        }
        Command::Replay { trace, map, config } => {
            let robot = match config {
                Some(path) => Config::load(&path)?.robot_model(),
                None => Config::default().robot_model(),
            };
            let map = map
                .or_else(|| sibling_map(&trace))
                .ok_or_else(|| BenchError::Usage("no --map given and none found next to the trace".into()))?;
            let records = load_trace(&trace)?;
            let world = load_map(&map)?;
            let report = replay(&records, &world, &robot);
            println!(
                "{} records, {:.3} s, path {:.3} m, {} colliding poses",
                report.records,
                report.duration,
                report.path_length,
                report.collisions.len()
            );
            if let Some(t) = report.first_collision_time {
                println!("first collision at t = {t:.3} s");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
