//! Census CSV, summary JSON and snapshot files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{BatchSummary, EquilibriumReport, Glider, OutcomeLabel, StopReason};
use crate::error::{Error, Result};
use crate::game::{Strategy, StrategyCensus};
use crate::harness::config::{Environment, ExperimentConfig};
use crate::harness::runner::{simulate, CellResult, SimulateOptions};
use crate::lattice::{Grid, ParsedSnapshot};

pub const CSV_HEADER: &str = "L,run,generation,n_C,n_D,n_A";

#[derive(Debug, Clone, Serialize)]
struct RunSummary {
    run: usize,
    generations: usize,
    stop: StopReason,
    label: OutcomeLabel,
    equilibrium: EquilibriumReport,
    glider: Option<Glider>,
    terminal: StrategyCensus,
    min_c_cluster: Option<usize>,
    min_enclosed_c_cluster: Option<usize>,
    c_clusters: usize,
}

/// Census statistics read at one fixed generation.
#[derive(Debug, Clone, Serialize)]
struct GenerationReadout {
    generation: usize,
    mean_census: [f64; 3],
    plurality_counts: BTreeMap<Strategy, usize>,
}

#[derive(Debug, Clone, Serialize)]
struct CellSummary {
    seed: String,
    #[serde(rename = "L")]
    loner: f64,
    census_file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    at_generation: Option<GenerationReadout>,
    summary: BatchSummary,
    runs: Vec<RunSummary>,
}

#[derive(Debug, Clone, Serialize)]
struct ExperimentSummary {
    name: String,
    environment: Environment,
    master_seed: u64,
    runs_per_cell: usize,
    max_generations: usize,
    cells: Vec<CellSummary>,
}

fn census_file_name(config: &ExperimentConfig, seed_index: usize) -> String {
    let base = &config.output.census;
    if config.seeds.len() == 1 {
        return base.clone();
    }
    let label = config.seeds[seed_index].label();
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}-{label}.{ext}"),
        None => format!("{base}-{label}"),
    }
}

fn readout(cell: &CellResult, generation: usize) -> GenerationReadout {
    let mut sum = [0.0; 3];
    let mut plurality_counts: BTreeMap<Strategy, usize> = Strategy::ALL.iter().map(|&s| (s, 0)).collect();
    for run in &cell.runs {
        let censuses = &run.analysis.censuses;
        let c = censuses.get(generation).or(censuses.last()).copied().unwrap_or_default();
        for (slot, s) in sum.iter_mut().zip(Strategy::ALL) {
            *slot += c.count(s) as f64;
        }
        if let Some(s) = c.strict_plurality() {
            *plurality_counts.entry(s).or_default() += 1;
        }
    }
    let n = cell.runs.len() as f64;
    GenerationReadout {
        generation,
        mean_census: sum.map(|x| x / n),
        plurality_counts,
    }
}

/// Every output file as (path relative to the output dir, contents), in a
/// fixed order.
pub fn render_outputs(config: &ExperimentConfig, cells: &[CellResult]) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let mut files = Vec::new();

    for seed_index in 0..config.seeds.len() {
        let mut csv = String::new();
        csv.push_str(CSV_HEADER);
        csv.push('\n');
        for cell in cells.iter().filter(|c| c.cell.seed_index == seed_index) {
            for run in &cell.runs {
                for (g, c) in run.analysis.censuses.iter().enumerate() {
                    writeln!(csv, "{},{},{g},{},{},{}", run.loner, run.run_index, c.n_c, c.n_d, c.n_a).unwrap();
                }
            }
        }
        files.push((PathBuf::from(census_file_name(config, seed_index)), csv.into_bytes()));
    }

    let summary = ExperimentSummary {
        name: config.name.clone(),
        environment: config.environment,
        master_seed: config.master_seed,
        runs_per_cell: config.runs,
        max_generations: config.max_generations,
        cells: cells
            .iter()
            .map(|cell| CellSummary {
                seed: cell.cell.spec.variant.label(),
                loner: cell.cell.table.loner,
                census_file: census_file_name(config, cell.cell.seed_index),
                at_generation: config.report_generation.map(|g| readout(cell, g)),
                summary: cell.summary.clone(),
                runs: cell
                    .runs
                    .iter()
                    .map(|r| RunSummary {
                        run: r.run_index,
                        generations: r.analysis.censuses.len(),
                        stop: r.stop,
                        label: r.analysis.label,
                        equilibrium: r.analysis.equilibrium,
                        glider: r.analysis.glider,
                        terminal: r.analysis.terminal_census(),
                        min_c_cluster: r.analysis.min_c_cluster,
                        min_enclosed_c_cluster: r.analysis.min_enclosed_c_cluster,
                        c_clusters: r.analysis.c_clusters,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&summary).map_err(|e| Error::validation("summary", e.to_string()))?;
    json.push(b'\n');
    files.push((PathBuf::from(&config.output.summary), json));

    let dir = PathBuf::from(&config.output.snapshots);
    for cell in cells {
        let label = cell.cell.spec.variant.label();
        for run in &cell.runs {
            for snap in &run.snapshots {
                let name = format!("{label}_L{}_run{}_gen{}.txt", run.loner, run.run_index, snap.generation);
                files.push((dir.join(name), snap.grid.to_snapshot(snap.generation, run.loner).into_bytes()));
            }
        }
    }
    Ok(files)
}

fn remove_path(path: &Path) -> std::io::Result<()> {
    if path.is_dir() {
        fs::remove_dir_all(path)
    } else {
        fs::remove_file(path)
    }
}

/// Writes `files` under `dir` through a staging directory so a failure
/// leaves no partial outputs behind. Existing outputs with the same
/// top-level names are replaced.
pub fn write_outputs(dir: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let staging = dir.join(format!(".staging-{}", std::process::id()));
    let result = stage_and_commit(dir, &staging, files);
    if staging.exists() {
        let _ = fs::remove_dir_all(&staging);
    }
    if result.is_err() && created_dir {
        let _ = fs::remove_dir_all(dir);
    }
    result
}

fn stage_and_commit(dir: &Path, staging: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    if staging.exists() {
        fs::remove_dir_all(staging).map_err(|e| Error::io(staging, e))?;
    }
    fs::create_dir(staging).map_err(|e| Error::io(staging, e))?;
    let mut top_level = Vec::new();
    for (rel, bytes) in files {
        let path = staging.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        if let Some(first) = rel.components().next() {
            let first = PathBuf::from(first.as_os_str());
            if !top_level.contains(&first) {
                top_level.push(first);
            }
        }
    }
    for name in &top_level {
        let target = dir.join(name);
        if target.exists() {
            remove_path(&target).map_err(|e| Error::io(&target, e))?;
        }
        let from = staging.join(name);
        fs::rename(&from, &target).map_err(|e| Error::io(&target, e))?;
    }
    Ok(files.iter().map(|(rel, _)| dir.join(rel)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub files: Vec<PathBuf>,
}

/// Simulates every cell and writes the census CSV, summary JSON and
/// snapshots.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let cells = simulate(
        config,
        SimulateOptions {
            workers: opts.workers,
            discard_snapshots: false,
        },
    )?;
    let files = render_outputs(config, &cells)?;
    let dir = opts.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let files = write_outputs(&dir, &files)?;
    Ok(ExperimentReport { cells, files })
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<ParsedSnapshot> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Grid::parse_snapshot(&text)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Grid> {
    read_snapshot(path).map(|s| s.grid)
}

pub fn write_snapshot(path: impl AsRef<Path>, grid: &Grid, generation: usize, loner: f64) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, grid.to_snapshot(generation, loner)).map_err(|e| Error::io(path, e))
}
