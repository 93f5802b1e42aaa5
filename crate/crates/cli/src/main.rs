use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use optpd_core::analysis::Connectivity;
use optpd_core::harness::{self, config, inspect_report, presets, RunOptions};

#[derive(Parser)]
#[command(name = "optpd", version, about = "Prisoner's Dilemma with abstention: batch simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write census CSV, summary JSON and snapshots.
    Run {
        /// Config file. With --preset its keys override the preset's.
        config: Option<PathBuf>,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per CPU).
        #[arg(long)]
        workers: Option<usize>,
        /// Start from a built-in experiment.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::PRESET_NAMES))]
        preset: Option<String>,
    },
    /// Print the census and cluster report of a snapshot file.
    Inspect {
        snapshot: PathBuf,
        /// Use 4-way instead of 8-way cluster adjacency.
        #[arg(long)]
        four_way: bool,
    },
}

fn run(config_path: Option<PathBuf>, out: Option<PathBuf>, workers: Option<usize>, preset: Option<String>) -> Result<()> {
    let text = match &config_path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let config = match (&preset, &config_path) {
        (Some(name), _) => presets::preset_with(name, &text)?,
        (None, Some(_)) => config::parse_config(&text)?,
        (None, None) => bail!("give a config file, a --preset, or both"),
    };
    let report = harness::run_experiment(&config, &RunOptions { out, workers })?;
    for cell in &report.cells {
        let s = &cell.summary;
        println!(
            "{} L={}: {} runs, C survives {:.1}%, fixed {} cycles {} open {} gliders {}",
            cell.cell.spec.variant,
            cell.cell.table.loner,
            s.runs,
            100.0 * s.cooperation_survival,
            s.fixed_points,
            s.cycles.values().sum::<usize>(),
            s.not_converged,
            s.gliders
        );
    }
    let written = report.files.len();
    if let Some(dir) = report.files.first().and_then(|f| f.parent()) {
        println!("wrote {written} files under {}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            workers,
            preset,
        } => run(config, out, workers, preset),
        Command::Inspect { snapshot, four_way } => harness::read_snapshot(&snapshot)
            .with_context(|| format!("loading {}", snapshot.display()))
            .map(|s| {
                let connectivity = if four_way { Connectivity::Four } else { Connectivity::Eight };
                print!("{}", inspect_report(&s, connectivity));
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
