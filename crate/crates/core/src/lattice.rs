//! Fully populated toroidal lattice with synchronous best-neighbour imitation.
//!
//! Each cell plays one game with each of its eight Moore neighbours, then
//! every cell at once copies the strategy of the highest scorer in its
//! neighbourhood.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, Dynamics, Snapshot, StopReason, TerminalState, Trajectory};
use crate::error::{Error, Result};
use crate::game::{PayoffTable, Strategy, StrategyCensus};

/// Neighbour offsets in row-major scan order: NW, N, NE, W, E, SW, S, SE.
/// `y` grows downwards.
pub const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    cells: Vec<Strategy>,
}

impl Grid {
    pub fn filled(width: usize, height: usize, s: Strategy) -> Self {
        Grid {
            width,
            height,
            cells: vec![s; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<Strategy>) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::validation(
                "cells",
                format!("{} cells do not fill a {width}x{height} grid", cells.len()),
            ));
        }
        Ok(Grid {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[Strategy] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Strategy {
        self.cells[self.index(x, y)]
    }

    pub fn set(&mut self, x: usize, y: usize, s: Strategy) {
        let i = self.index(x, y);
        self.cells[i] = s;
    }

    /// Coordinates of `(x + dx, y + dy)` wrapped onto the torus.
    #[inline]
    pub fn wrap(&self, x: usize, y: usize, dx: isize, dy: isize) -> (usize, usize) {
        let w = self.width as isize;
        let h = self.height as isize;
        (
            (x as isize + dx).rem_euclid(w) as usize,
            (y as isize + dy).rem_euclid(h) as usize,
        )
    }

    pub fn census(&self) -> StrategyCensus {
        StrategyCensus::of(&self.cells)
    }

    /// The grid shifted so that cell `(x, y)` moves to `(x + dx, y + dy)`.
    pub fn translated(&self, dx: isize, dy: isize) -> Grid {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let (tx, ty) = self.wrap(x, y, dx, dy);
                out.cells[ty * self.width + tx] = self.get(x, y);
            }
        }
        out
    }

    /// FNV-1a over the dimensions and cell bytes.
    pub fn state_hash(&self) -> u64 {
        let mut h = analysis::Fnv1a::new();
        h.write_u64(self.width as u64);
        h.write_u64(self.height as u64);
        for &c in &self.cells {
            h.write_u8(c.as_char() as u8);
        }
        h.finish()
    }

    /// Plain-text snapshot: header line then one row of `C`/`D`/`A` per line.
    pub fn to_snapshot(&self, generation: usize, loner: f64) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height + 48);
        writeln!(
            out,
            "gen={generation} w={} h={} L={loner}",
            self.width, self.height
        )
        .unwrap();
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|s| s.as_char()));
            out.push('\n');
        }
        out
    }

    /// Parses the snapshot format written by [`Grid::to_snapshot`].
    pub fn parse_snapshot(text: &str) -> Result<ParsedSnapshot> {
        let format_err = |line: usize, message: String| Error::Format { line, message };
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| format_err(1, "missing header".into()))?;
        let mut generation = None;
        let mut width = None;
        let mut height = None;
        let mut loner = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| format_err(1, format!("malformed header field `{field}`")))?;
            let bad = |_| format_err(1, format!("bad value in `{field}`"));
            match key {
                "gen" => generation = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "w" => width = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "h" => height = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "L" => loner = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(format_err(1, format!("unknown header key `{key}`"))),
            }
        }
        let (Some(generation), Some(width), Some(height), Some(loner)) =
            (generation, width, height, loner)
        else {
            return Err(format_err(1, "header needs gen, w, h and L".into()));
        };
        if width == 0 || height == 0 {
            return Err(format_err(1, "empty grid".into()));
        }
        let mut cells = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if rows == height {
                if line.is_empty() {
                    continue;
                }
                return Err(format_err(lineno, "more rows than header height".into()));
            }
            if line.chars().count() != width {
                return Err(format_err(
                    lineno,
                    format!("row has {} cells, expected {width}", line.chars().count()),
                ));
            }
            for c in line.chars() {
                cells.push(
                    Strategy::from_char(c)
                        .ok_or_else(|| format_err(lineno, format!("invalid cell `{c}`")))?,
                );
            }
            rows += 1;
        }
        if rows != height {
            return Err(format_err(
                rows + 2,
                format!("found {rows} rows, expected {height}"),
            ));
        }
        Ok(ParsedSnapshot {
            generation,
            loner,
            grid: Grid {
                width,
                height,
                cells,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSnapshot {
    pub generation: usize,
    pub loner: f64,
    pub grid: Grid,
}

fn check_size(grid: &Grid) -> Result<()> {
    if grid.width < 3 || grid.height < 3 {
        return Err(Error::GridTooSmall {
            width: grid.width,
            height: grid.height,
        });
    }
    Ok(())
}

/// The eight wrapped Moore neighbours of `(x, y)` in scan order.
pub fn moore_neighbors(grid: &Grid, x: usize, y: usize) -> Result<[(usize, usize); 8]> {
    check_size(grid)?;
    if x >= grid.width || y >= grid.height {
        return Err(Error::validation(
            "coordinate",
            format!("({x},{y}) outside {}x{}", grid.width, grid.height),
        ));
    }
    Ok(MOORE_OFFSETS.map(|(dx, dy)| grid.wrap(x, y, dx, dy)))
}

/// Payoff sums over the eight neighbours of every cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreField {
    pub width: usize,
    pub height: usize,
    pub scores: Vec<f64>,
}

impl ScoreField {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.scores[y * self.width + x]
    }
}

pub fn score_all(grid: &Grid, table: &PayoffTable) -> Result<ScoreField> {
    check_size(grid)?;
    let m = table.matrix();
    let (w, h) = (grid.width, grid.height);
    let mut scores = vec![0.0; w * h];
    for y in 0..h {
        let rows = [(y + h - 1) % h, y, (y + 1) % h];
        for x in 0..w {
            let cols = [(x + w - 1) % w, x, (x + 1) % w];
            let row = &m[grid.cells[y * w + x].index()];
            scores[y * w + x] = MOORE_OFFSETS
                .iter()
                .map(|&(dx, dy)| {
                    let nx = cols[(dx + 1) as usize];
                    let ny = rows[(dy + 1) as usize];
                    row[grid.cells[ny * w + nx].index()]
                })
                .sum();
        }
    }
    Ok(ScoreField {
        width: w,
        height: h,
        scores,
    })
}

/// How a cell breaks ties when choosing whom to imitate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Keep the own strategy if the own score ties the best; otherwise take
    /// the first best neighbour in scan order.
    #[default]
    KeepOwnThenScan,
    /// Keep the own strategy unless every best-scoring candidate plays the
    /// same strategy.
    KeepOwnUnlessUnanimous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImitationRule {
    pub include_self: bool,
    pub tie_rule: TieRule,
}

impl Default for ImitationRule {
    fn default() -> Self {
        ImitationRule {
            include_self: true,
            tie_rule: TieRule::KeepOwnThenScan,
        }
    }
}

/// Scores closer than this are equal. Sums of eight payoffs like `1.8` pick
/// up rounding error that would otherwise break exact ties arbitrarily.
pub const SCORE_TOLERANCE: f64 = 1e-9;

fn choose(
    own: Strategy,
    own_score: f64,
    neighbours: &[(Strategy, f64); 8],
    rule: ImitationRule,
) -> Strategy {
    let best_neighbour = neighbours
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let best = if rule.include_self {
        best_neighbour.max(own_score)
    } else {
        best_neighbour
    };
    let ties = |s: f64| s >= best - SCORE_TOLERANCE;
    if rule.include_self && ties(own_score) {
        return own;
    }
    let mut maximal = neighbours.iter().filter(|&&(_, s)| ties(s)).map(|&(st, _)| st);
    let first = maximal.next().unwrap_or(own);
    match rule.tie_rule {
        TieRule::KeepOwnThenScan => first,
        TieRule::KeepOwnUnlessUnanimous => {
            if maximal.all(|s| s == first) {
                first
            } else {
                own
            }
        }
    }
}

/// One synchronous update computed entirely from the prior grid's scores.
pub fn imitation_step(grid: &Grid, table: &PayoffTable, rule: ImitationRule) -> Result<Grid> {
    let scores = score_all(grid, table)?;
    let (w, h) = (grid.width, grid.height);
    let mut next = grid.clone();
    for y in 0..h {
        for x in 0..w {
            let neighbours = MOORE_OFFSETS.map(|(dx, dy)| {
                let (nx, ny) = grid.wrap(x, y, dx, dy);
                let i = ny * w + nx;
                (grid.cells[i], scores.scores[i])
            });
            let i = y * w + x;
            next.cells[i] = choose(grid.cells[i], scores.scores[i], &neighbours, rule);
        }
    }
    Ok(next)
}

/// Which full-grid frames a lattice run keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SnapshotPolicy {
    None,
    /// First, last and every `every`-th generation.
    Periodic { every: usize },
    All,
}

impl Default for SnapshotPolicy {
    fn default() -> Self {
        SnapshotPolicy::Periodic { every: 10 }
    }
}

impl SnapshotPolicy {
    fn keeps(&self, generation: usize) -> bool {
        match *self {
            SnapshotPolicy::None => false,
            SnapshotPolicy::Periodic { every } => generation == 0 || (every > 0 && generation % every == 0),
            SnapshotPolicy::All => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    pub max_generations: usize,
    pub rule: ImitationRule,
    pub snapshots: SnapshotPolicy,
    /// Longest cycle that stops a run early.
    pub max_period: usize,
    /// Number of trailing frames kept densely for cycle and glider checks.
    pub window: usize,
}

impl Default for LatticeParams {
    fn default() -> Self {
        LatticeParams {
            max_generations: 1000,
            rule: ImitationRule::default(),
            snapshots: SnapshotPolicy::default(),
            max_period: analysis::DEFAULT_MAX_PERIOD,
            window: 3 * analysis::DEFAULT_MAX_PERIOD + 1,
        }
    }
}

/// Iterates [`imitation_step`] until a fixed point, a confirmed cycle or the
/// generation cap.
///
/// The trajectory records generation 0 onwards. A fixed point is not
/// appended again; its repeat is stored as the successor hash instead.
pub fn run_lattice(initial: Grid, table: &PayoffTable, params: &LatticeParams) -> Result<Trajectory> {
    table.validate()?;
    check_size(&initial)?;
    let window = params.window.max(3 * params.max_period + 1).max(2);

    let mut traj = Trajectory::new(Dynamics::Deterministic);
    let mut recent: std::collections::VecDeque<Snapshot> = std::collections::VecDeque::new();
    let mut current = initial;
    let mut generation = 0;
    traj.record(current.census(), current.state_hash());
    if params.snapshots.keeps(0) {
        traj.snapshots.push(Snapshot::new(0, current.clone()));
    }
    recent.push_back(Snapshot::new(0, current.clone()));

    let stop = loop {
        if generation >= params.max_generations {
            break StopReason::GenerationCap;
        }
        let next = imitation_step(&current, table, params.rule)?;
        let hash = next.state_hash();
        if next == current {
            traj.successor_hash = Some(hash);
            break StopReason::FixedPoint;
        }
        generation += 1;
        traj.record(next.census(), hash);
        if params.snapshots.keeps(generation) {
            traj.snapshots.push(Snapshot::new(generation, next.clone()));
        }
        recent.push_back(Snapshot::new(generation, next.clone()));
        if recent.len() > window {
            recent.pop_front();
        }
        current = next;

        if let Some(period) = analysis::tail_cycle(&traj.hashes, params.max_period) {
            // Hashes only nominate; the frames decide.
            let n = recent.len();
            if n > period && recent[n - 1].grid == recent[n - 1 - period].grid {
                break StopReason::Cycle(period);
            }
        }
    };

    if !matches!(params.snapshots, SnapshotPolicy::None)
        && traj.snapshots.last().map(|s| s.generation) != Some(generation)
    {
        traj.snapshots.push(Snapshot::new(generation, current.clone()));
    }
    traj.recent = recent.into();
    traj.stop = stop;
    traj.terminal = TerminalState::Grid(current);
    Ok(traj)
}
