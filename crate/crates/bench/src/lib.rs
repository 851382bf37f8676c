//! Benchmark harness for `tentacle-nav`: configuration, multi-map trials,
//! timing probes, result files and trace replay.

pub mod benchmark;
pub mod config;
pub mod emit;
pub mod error;
pub mod replay;
pub mod timing;

pub use benchmark::{run_benchmark, BenchmarkRun, MapAggregate, TrialOutcome, TrialRow};
pub use config::{Config, MapKind, MapSpec};
pub use error::BenchError;
pub use timing::{run_timing, TimingReport};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "TENTACLE_BENCH_OUT";
