//! Configuration, batch runs and file I/O.

pub mod config;
pub mod inspect;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{parse_config, Environment, ExperimentCell, ExperimentConfig};
pub use inspect::inspect_report;
pub use output::{load_snapshot, read_snapshot, run_experiment, write_snapshot, ExperimentReport, RunOptions};
pub use presets::{preset, preset_with, PRESET_NAMES};
pub use runner::{simulate, simulate_run, CellResult, RunRecord, SimulateOptions};
