//! Batch orchestration.

use rayon::prelude::*;

use crate::analysis::{aggregate_analyses, analyze_run, BatchSummary, RunAnalysis, Snapshot, StopReason};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::config::ExperimentCell;
use crate::lattice::run_lattice;
use crate::rng::cell_stream;
use crate::seeding::{seed, Seeded};
use crate::wellmixed::run_wellmixed;

/// Everything kept from one simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_index: usize,
    pub loner: f64,
    pub stop: StopReason,
    pub analysis: RunAnalysis,
    /// Frames kept by the snapshot policy (lattice runs only).
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: ExperimentCell,
    pub runs: Vec<RunRecord>,
    pub summary: BatchSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimulateOptions {
    /// Worker threads; `None` uses one per CPU.
    pub workers: Option<usize>,
    /// Drop snapshot frames after analysis to save memory.
    pub discard_snapshots: bool,
}

/// Seeds, simulates and analyses run `run_index` of `cell`. The result
/// depends only on the config and the three indices.
pub fn simulate_run(config: &ExperimentConfig, cell: &ExperimentCell, run_index: usize) -> Result<RunRecord> {
    let mut rng = cell_stream(config.master_seed, cell.seed_index, cell.l_index, run_index);
    let trajectory = match seed(&cell.spec, &mut rng)? {
        Seeded::Population(pop) => run_wellmixed(pop, &cell.table, &config.wellmixed_params(), &mut rng)?,
        Seeded::Grid(grid) => run_lattice(grid, &cell.table, &config.lattice_params())?,
    };
    let analysis = analyze_run(&trajectory, &config.analysis);
    Ok(RunRecord {
        run_index,
        loner: cell.table.loner,
        stop: trajectory.stop,
        analysis,
        snapshots: trajectory.snapshots,
    })
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::validation("workers", "must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::validation("workers", e.to_string()))
}

/// Runs every cell of the experiment in memory. Output order is cell order
/// then run order, whatever the worker count.
pub fn simulate(config: &ExperimentConfig, opts: SimulateOptions) -> Result<Vec<CellResult>> {
    config.validate()?;
    let cells = config.cells();
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..config.runs).map(move |r| (c, r)))
        .collect();
    let records = pool(opts.workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(c, r)| {
                let mut record = simulate_run(config, &cells[c], r)?;
                if opts.discard_snapshots {
                    record.snapshots = Vec::new();
                }
                Ok(record)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = records.into_iter();
    cells
        .into_iter()
        .map(|cell| {
            let runs: Vec<RunRecord> = records.by_ref().take(config.runs).collect();
            let analyses: Vec<RunAnalysis> = runs.iter().map(|r| r.analysis.clone()).collect();
            let summary = aggregate_analyses(&analyses)?;
            Ok(CellResult { cell, runs, summary })
        })
        .collect()
}
