//! Human-readable report for a snapshot file. Cooperator clusters are
//! listed one per line; the other strategies are summarized.

use std::fmt::Write as _;

use crate::analysis::{find_clusters_with, Connectivity};
use crate::game::Strategy;
use crate::lattice::ParsedSnapshot;

pub fn inspect_report(snapshot: &ParsedSnapshot, connectivity: Connectivity) -> String {
    let grid = &snapshot.grid;
    let census = grid.census();
    let mut out = String::new();
    writeln!(
        out,
        "generation {}  grid {}x{}  L={}",
        snapshot.generation,
        grid.width(),
        grid.height(),
        snapshot.loner
    )
    .unwrap();
    writeln!(out, "census C={} D={} A={}", census.n_c, census.n_d, census.n_a).unwrap();
    for s in Strategy::ALL {
        let report = find_clusters_with(grid, s, connectivity);
        let mut sizes: Vec<usize> = report.clusters.iter().map(|c| c.size).collect();
        sizes.sort_unstable();
        let enclosed = report.clusters.iter().filter(|c| c.defector_enclosed).count();
        write!(out, "{s} clusters: {}", sizes.len()).unwrap();
        if let (Some(min), Some(max)) = (sizes.first(), sizes.last()) {
            write!(out, "  min {min}  max {max}").unwrap();
        }
        if s != Strategy::Defect {
            write!(out, "  enclosed by D {enclosed}").unwrap();
        }
        out.push('\n');
        if s != Strategy::Cooperate {
            continue;
        }
        for c in &report.clusters {
            let b = c.bounds;
            writeln!(
                out,
                "  size {:>5}  x {}..={}  y {}..={}{}",
                c.size,
                b.min_x,
                b.max_x,
                b.min_y,
                b.max_y,
                if c.defector_enclosed { "  enclosed" } else { "" }
            )
            .unwrap();
        }
    }
    out
}
