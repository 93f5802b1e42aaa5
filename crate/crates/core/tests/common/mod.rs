//! Brute-force reference implementations shared by the integration tests.
//! They trade speed for obviousness and reuse nothing from the library
//! beyond the grid container and payoff lookup.

#![allow(dead_code)]

use std::collections::BTreeSet;

use optpd_core::{payoff_pair, Grid, PayoffTable, Strategy};

pub fn grid_from_indices(width: usize, height: usize, cells: &[u8]) -> Grid {
    let cells = cells.iter().map(|&i| Strategy::ALL[i as usize % 3]).collect();
    Grid::from_cells(width, height, cells).unwrap()
}

fn wrapped(width: usize, height: usize, x: usize, y: usize, dx: i64, dy: i64) -> (usize, usize) {
    let nx = (x as i64 + dx).rem_euclid(width as i64) as usize;
    let ny = (y as i64 + dy).rem_euclid(height as i64) as usize;
    (nx, ny)
}

/// Neighbours in NW, N, NE, W, E, SW, S, SE order.
pub fn neighbours(grid: &Grid, x: usize, y: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for dy in -1..=1 {
        for dx in -1..=1 {
            if (dx, dy) != (0, 0) {
                out.push(wrapped(grid.width(), grid.height(), x, y, dx, dy));
            }
        }
    }
    out
}

pub fn score(grid: &Grid, table: &PayoffTable, x: usize, y: usize) -> f64 {
    neighbours(grid, x, y)
        .into_iter()
        .map(|(nx, ny)| payoff_pair(grid.get(x, y), grid.get(nx, ny), table).focal)
        .sum()
}

/// Default imitation rule, cell by cell: keep the own strategy if its score
/// ties the best in the neighbourhood, else copy the first best neighbour.
pub fn imitation_step(grid: &Grid, table: &PayoffTable) -> Grid {
    let mut scores = vec![vec![0.0; grid.width()]; grid.height()];
    for (y, row) in scores.iter_mut().enumerate() {
        for (x, s) in row.iter_mut().enumerate() {
            *s = score(grid, table, x, y);
        }
    }
    let mut next = grid.clone();
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            let own = scores[y][x];
            let ns = neighbours(grid, x, y);
            let best = ns.iter().map(|&(nx, ny)| scores[ny][nx]).fold(own, f64::max);
            if own >= best - 1e-9 {
                continue;
            }
            let &(bx, by) = ns.iter().find(|&&(nx, ny)| scores[ny][nx] >= best - 1e-9).unwrap();
            next.set(x, y, grid.get(bx, by));
        }
    }
    next
}

/// Components of `strategy` cells as sorted index lists, sorted.
pub fn flood_fill(grid: &Grid, strategy: Strategy, moore: bool) -> Vec<Vec<usize>> {
    let (w, h) = (grid.width(), grid.height());
    let mut label = vec![usize::MAX; w * h];
    let mut next_label = 0;
    for start in 0..w * h {
        if grid.cells()[start] != strategy || label[start] != usize::MAX {
            continue;
        }
        label[start] = next_label;
        // Repeated relaxation until nothing changes.
        loop {
            let mut changed = false;
            for i in 0..w * h {
                if label[i] != next_label {
                    continue;
                }
                let (x, y) = (i % w, i / w);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx, dy) == (0, 0) || (!moore && dx != 0 && dy != 0) {
                            continue;
                        }
                        let (nx, ny) = wrapped(w, h, x, y, dx, dy);
                        let j = ny * w + nx;
                        if grid.cells()[j] == strategy && label[j] == usize::MAX {
                            label[j] = next_label;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        next_label += 1;
    }
    let mut out: Vec<Vec<usize>> = (0..next_label)
        .map(|l| (0..w * h).filter(|&i| label[i] == l).collect())
        .collect();
    out.sort();
    out
}

/// Every nonzero `(dx, dy)` with `to[(x + dx, y + dy)] == from[(x, y)]`.
pub fn all_translations(from: &Grid, to: &Grid) -> BTreeSet<(usize, usize)> {
    let (w, h) = (from.width(), from.height());
    let mut out = BTreeSet::new();
    if (w, h) != (to.width(), to.height()) {
        return out;
    }
    for dy in 0..h {
        for dx in 0..w {
            if (dx, dy) == (0, 0) {
                continue;
            }
            let ok = (0..h).all(|y| (0..w).all(|x| to.get((x + dx) % w, (y + dy) % h) == from.get(x, y)));
            if ok {
                out.insert((dx, dy));
            }
        }
    }
    out
}

/// First (period, generation, offset) at which consecutive frames keep
/// moving by a common nonzero translation, searching periods upwards.
pub fn brute_glider(frames: &[Grid], max_period: usize) -> Option<(usize, usize, (usize, usize))> {
    for p in 1..=max_period {
        for g in 0..frames.len() {
            if g + 1 + p >= frames.len() {
                break;
            }
            if frames[g] == frames[g + p] || frames[g + 1] == frames[g + 1 + p] {
                continue;
            }
            let first = all_translations(&frames[g], &frames[g + p]);
            let second = all_translations(&frames[g + 1], &frames[g + 1 + p]);
            if let Some(&d) = first.intersection(&second).next() {
                return Some((p, g, d));
            }
        }
    }
    None
}

/// Fitness of every member by explicit pairwise play.
pub fn roundrobin_fitness(members: &[Strategy], table: &PayoffTable) -> Vec<f64> {
    (0..members.len())
        .map(|i| {
            (0..members.len())
                .filter(|&j| j != i)
                .map(|j| payoff_pair(members[i], members[j], table).focal)
                .sum()
        })
        .collect()
}
