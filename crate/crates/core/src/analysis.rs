//! Trajectory analysis: equilibria, clusters, gliders and outcome labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Strategy, StrategyCensus};
use crate::lattice::{Grid, MOORE_OFFSETS};
use crate::wellmixed::Population;

pub const DEFAULT_MAX_PERIOD: usize = 20;
pub const DEFAULT_GLIDER_PERIOD: usize = 8;

/// 64-bit FNV-1a, stable across platforms and toolchains.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a(u64);

impl Fnv1a {
    pub fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_u8(&mut self, b: u8) {
        self.0 ^= b as u64;
        self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
    }

    pub fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.write_u8(b);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Whether repeated states imply repeated futures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Deterministic,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "period")]
pub enum StopReason {
    Homogeneous,
    FixedPoint,
    Cycle(usize),
    GenerationCap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub generation: usize,
    pub grid: Grid,
}

impl Snapshot {
    pub fn new(generation: usize, grid: Grid) -> Self {
        Snapshot { generation, grid }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminalState {
    Population(Population),
    Grid(Grid),
}

/// Record of one simulation run, generation 0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dynamics: Dynamics,
    pub censuses: Vec<StrategyCensus>,
    pub hashes: Vec<u64>,
    /// Hash of the state one step past the last recorded generation, when
    /// the run computed it (fixed points and absorbed populations).
    pub successor_hash: Option<u64>,
    /// Frames kept by the snapshot policy.
    pub snapshots: Vec<Snapshot>,
    /// Dense trailing frames, oldest first.
    pub recent: Vec<Snapshot>,
    pub terminal: TerminalState,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn new(dynamics: Dynamics) -> Self {
        Trajectory {
            dynamics,
            censuses: Vec::new(),
            hashes: Vec::new(),
            successor_hash: None,
            snapshots: Vec::new(),
            recent: Vec::new(),
            terminal: TerminalState::Population(Population::default()),
            stop: StopReason::GenerationCap,
        }
    }

    /// Builds a deterministic trajectory from consecutive grids, every
    /// frame stored.
    pub fn from_grids(grids: &[Grid]) -> Self {
        let mut t = Trajectory::new(Dynamics::Deterministic);
        for (g, grid) in grids.iter().enumerate() {
            t.record(grid.census(), grid.state_hash());
            t.snapshots.push(Snapshot::new(g, grid.clone()));
        }
        if let Some(last) = grids.last() {
            t.terminal = TerminalState::Grid(last.clone());
        }
        t
    }

    pub fn record(&mut self, census: StrategyCensus, hash: u64) {
        self.censuses.push(census);
        self.hashes.push(hash);
    }

    pub fn generations(&self) -> usize {
        self.censuses.len()
    }

    pub fn initial_census(&self) -> StrategyCensus {
        self.censuses.first().copied().unwrap_or_default()
    }

    pub fn terminal_census(&self) -> StrategyCensus {
        self.censuses.last().copied().unwrap_or_default()
    }

    pub fn terminal_grid(&self) -> Option<&Grid> {
        match &self.terminal {
            TerminalState::Grid(g) => Some(g),
            TerminalState::Population(_) => None,
        }
    }

    /// Stored frame for `generation`, from either the policy snapshots or
    /// the trailing window.
    pub fn frame(&self, generation: usize) -> Option<&Grid> {
        self.recent
            .iter()
            .chain(self.snapshots.iter())
            .find(|s| s.generation == generation)
            .map(|s| &s.grid)
    }

    /// All stored frames in generation order without duplicates.
    pub fn frames(&self) -> Vec<&Snapshot> {
        let mut all: BTreeMap<usize, &Snapshot> = BTreeMap::new();
        for s in self.snapshots.iter().chain(self.recent.iter()) {
            all.entry(s.generation).or_insert(s);
        }
        all.into_values().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "period")]
pub enum EquilibriumKind {
    FixedPoint,
    Cycle(usize),
    NotConverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub onset_generation: usize,
}

/// Smallest `2 <= p <= max_period` such that the last `2p` hashes each equal
/// the hash `p` generations earlier.
pub fn tail_cycle(hashes: &[u64], max_period: usize) -> Option<usize> {
    let n = hashes.len();
    (2..=max_period).find(|&p| {
        n >= 3 * p && (n - 2 * p..n).all(|i| hashes[i] == hashes[i - p])
    })
}

fn frames_agree(traj: &Trajectory, a: usize, b: usize) -> bool {
    match (traj.frame(a), traj.frame(b)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

pub fn detect_equilibrium(traj: &Trajectory, max_period: usize) -> EquilibriumReport {
    let not_converged = EquilibriumReport {
        kind: EquilibriumKind::NotConverged,
        onset_generation: traj.generations(),
    };
    let Some(&last) = traj.hashes.last() else {
        return not_converged;
    };
    let n = traj.hashes.len();

    if traj.successor_hash == Some(last)
        || (traj.dynamics == Dynamics::Deterministic && n >= 2 && traj.hashes[n - 2] == last && frames_agree(traj, n - 2, n - 1))
    {
        let onset = traj.hashes.iter().rposition(|&h| h != last).map_or(0, |i| i + 1);
        return EquilibriumReport {
            kind: EquilibriumKind::FixedPoint,
            onset_generation: onset,
        };
    }
    if traj.dynamics == Dynamics::Stochastic {
        return not_converged;
    }

    let mut extended = traj.hashes.clone();
    if let Some(h) = traj.successor_hash {
        extended.push(h);
    }
    let Some(period) = tail_cycle(&extended, max_period) else {
        return not_converged;
    };
    let m = extended.len();
    let mut i = m - 1;
    while i >= period && extended[i] == extended[i - period] {
        i -= 1;
    }
    let onset = if i < period { 0 } else { i + 1 - period };
    let confirmed = (onset + period..n).all(|i| frames_agree(traj, i, i - period));
    if !confirmed {
        return not_converged;
    }
    EquilibriumReport {
        kind: EquilibriumKind::Cycle(period),
        onset_generation: onset,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &MOORE_OFFSETS,
        }
    }
}

/// Inclusive bounds in grid coordinates. On a torus a component that wraps
/// an edge reports the full extent along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub strategy: Strategy,
    pub size: usize,
    pub bounds: BoundingBox,
    /// Every cell touching the cluster from outside holds a defector.
    pub defector_enclosed: bool,
    #[serde(skip)]
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
}

impl ClusterReport {
    pub fn total(&self) -> usize {
        self.clusters.iter().map(|c| c.size).sum()
    }

    pub fn min_size(&self) -> Option<usize> {
        self.clusters.iter().map(|c| c.size).min()
    }
}

pub fn find_clusters(grid: &Grid, strategy: Strategy) -> ClusterReport {
    find_clusters_with(grid, strategy, Connectivity::Eight)
}

/// Connected components of `strategy` cells with toroidal wrap, ordered by
/// their first cell in row-major order.
pub fn find_clusters_with(grid: &Grid, strategy: Strategy, connectivity: Connectivity) -> ClusterReport {
    let (w, h) = (grid.width(), grid.height());
    let cells = grid.cells();
    let mut seen = vec![false; cells.len()];
    let mut clusters = Vec::new();
    let mut stack = Vec::new();
    for start in 0..cells.len() {
        if seen[start] || cells[start] != strategy {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let (x, y) = (i % w, i / w);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = grid.wrap(x, y, dx, dy);
                let j = ny * w + nx;
                if !seen[j] && cells[j] == strategy {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        let bounds = torus_bounds(&members, w, h);
        let defector_enclosed = members.iter().all(|&i| {
            let (x, y) = (i % w, i / w);
            MOORE_OFFSETS.iter().all(|&(dx, dy)| {
                let (nx, ny) = grid.wrap(x, y, dx, dy);
                let c = cells[ny * w + nx];
                c == strategy || c == Strategy::Defect
            })
        }) && members.len() < cells.len();
        clusters.push(Cluster {
            strategy,
            size: members.len(),
            bounds,
            defector_enclosed,
            cells: members,
        });
    }
    ClusterReport { clusters }
}

/// Smallest arc covering the occupied coordinates on a ring of length `n`,
/// as (start, end) with `end` possibly < `start` when wrapping.
fn ring_extent(occupied: &[bool]) -> (usize, usize) {
    let n = occupied.len();
    // Find the longest run of empty positions (cyclically); the extent is
    // its complement.
    let mut best_len = 0;
    let mut best_end = 0;
    let mut run = 0;
    for k in 0..2 * n {
        if occupied[k % n] {
            run = 0;
        } else {
            run += 1;
            if run > best_len && run <= n {
                best_len = run;
                best_end = k % n;
            }
        }
    }
    if best_len == 0 {
        return (0, n - 1);
    }
    ((best_end + 1) % n, (best_end + n - best_len) % n)
}

fn torus_bounds(members: &[usize], w: usize, h: usize) -> BoundingBox {
    let mut xs = vec![false; w];
    let mut ys = vec![false; h];
    for &i in members {
        xs[i % w] = true;
        ys[i / w] = true;
    }
    let (min_x, max_x) = ring_extent(&xs);
    let (min_y, max_y) = ring_extent(&ys);
    BoundingBox {
        min_x,
        min_y,
        max_x,
        max_y,
    }
}

/// Offset `(dx, dy) != (0, 0)` with `to == from.translated(dx, dy)`, the
/// smallest in row-major shift order.
pub fn find_translation(from: &Grid, to: &Grid) -> Option<(usize, usize)> {
    if from.width() != to.width() || from.height() != to.height() || from.census() != to.census() {
        return None;
    }
    let (w, h) = (from.width(), from.height());
    let census = from.census();
    // Anchor on the rarest strategy: the first such cell of `from` must land
    // on a cell of the same strategy in `to`.
    let rare = Strategy::ALL
        .into_iter()
        .filter(|&s| census.count(s) > 0)
        .min_by_key(|&s| census.count(s))?;
    let anchor = from.cells().iter().position(|&c| c == rare)?;
    let (ax, ay) = (anchor % w, anchor / w);
    let mut candidates: Vec<(usize, usize)> = to
        .cells()
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c == rare)
        .map(|(j, _)| ((j % w + w - ax) % w, (j / w + h - ay) % h))
        .filter(|&d| d != (0, 0))
        .collect();
    candidates.sort_by_key(|&(dx, dy)| (dy, dx));
    candidates
        .into_iter()
        .find(|&(dx, dy)| translation_matches(from, to, dx, dy))
}

fn translation_matches(from: &Grid, to: &Grid, dx: usize, dy: usize) -> bool {
    let (w, h) = (from.width(), from.height());
    let src = from.cells();
    let dst = to.cells();
    (0..h).all(|y| {
        let ty = (y + dy) % h;
        (0..w).all(|x| src[y * w + x] == dst[ty * w + (x + dx) % w])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Glider {
    pub period: usize,
    /// Displacement per period, normalised to `(-w/2, w/2]` x `(-h/2, h/2]`.
    pub displacement: (isize, isize),
    /// First generation of the confirming window.
    pub generation: usize,
    /// Cells in the moving pattern (the whole grid for global translation).
    pub cells: usize,
}

fn signed_offset(d: usize, n: usize) -> isize {
    if d > n / 2 {
        d as isize - n as isize
    } else {
        d as isize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GliderOptions {
    pub max_period: usize,
    /// Also look for translating patterns embedded in a static background.
    pub local_patterns: bool,
    /// Smallest embedded pattern that counts.
    pub min_pattern_cells: usize,
}

impl Default for GliderOptions {
    fn default() -> Self {
        GliderOptions {
            max_period: DEFAULT_GLIDER_PERIOD,
            local_patterns: true,
            min_pattern_cells: 4,
        }
    }
}

/// Smallest period `p` at which a changed frame equals the frame `p`
/// generations earlier under a nonzero torus translation, with the same
/// translation for two consecutive starting generations. Only stored frames
/// are used.
pub fn detect_glider(traj: &Trajectory, max_period: usize) -> Option<Glider> {
    detect_glider_with(
        traj,
        &GliderOptions {
            max_period,
            ..GliderOptions::default()
        },
    )
}

pub fn detect_glider_with(traj: &Trajectory, opts: &GliderOptions) -> Option<Glider> {
    let frames = traj.frames();
    let by_gen: BTreeMap<usize, &Grid> = frames.iter().map(|s| (s.generation, &s.grid)).collect();
    for p in 1..=opts.max_period {
        let mut previous: Option<(usize, (usize, usize))> = None;
        for (&g, &grid) in &by_gen {
            let Some(&later) = by_gen.get(&(g + p)) else {
                previous = None;
                continue;
            };
            // A symmetric grid that stands still maps onto itself under
            // nonzero shifts; that is not motion.
            if grid == later {
                previous = None;
                continue;
            }
            if let Some((pg, pd)) = previous {
                if pg + 1 == g && translation_matches(grid, later, pd.0, pd.1) {
                    return Some(Glider {
                        period: p,
                        displacement: (signed_offset(pd.0, grid.width()), signed_offset(pd.1, grid.height())),
                        generation: pg,
                        cells: grid.len(),
                    });
                }
            }
            previous = find_translation(grid, later).map(|d| (g, d));
        }
    }
    if opts.local_patterns {
        return detect_local_glider(&by_gen, opts);
    }
    None
}

/// A moving pattern: a connected group of non-background cells of `later`
/// equal to a group of `earlier` shifted by a nonzero offset, where the group
/// has left its old place and was not already at the new one. Influence
/// travels one cell per generation, so shifts beyond `max_shift` are ignored.
fn pattern_moves(earlier: &Grid, later: &Grid, min_cells: usize, max_shift: usize) -> Vec<((usize, usize), usize)> {
    let census = later.census();
    let Some(background) = Strategy::ALL.into_iter().max_by_key(|&s| census.count(s)) else {
        return Vec::new();
    };
    let (w, h) = (earlier.width(), earlier.height());
    let old_patterns = foreground_patterns(earlier, background);
    let new_patterns = foreground_patterns(later, background);
    let mut moves = Vec::new();
    for new in &new_patterns {
        if new.len() < min_cells || new.len() * 2 > later.len() {
            continue;
        }
        if new.iter().all(|&i| earlier.cells()[i] == later.cells()[i]) {
            continue;
        }
        for old in &old_patterns {
            if old.len() != new.len() {
                continue;
            }
            let (ox, oy) = (old[0] % w, old[0] / w);
            // Components are sorted row-major, but wrapping can reorder the
            // first cell, so try every cell of `new` as the image of old[0].
            for &anchor in new {
                let d = ((anchor % w + w - ox) % w, (anchor / w + h - oy) % h);
                let reach = signed_offset(d.0, w).unsigned_abs().max(signed_offset(d.1, h).unsigned_abs());
                if d == (0, 0) || reach > max_shift {
                    continue;
                }
                let matches = old.iter().all(|&i| {
                    let (x, y) = (i % w, i / w);
                    let j = ((y + d.1) % h) * w + (x + d.0) % w;
                    later.cells()[j] == earlier.cells()[i] && new.binary_search(&j).is_ok()
                });
                let vacated = old.iter().any(|&i| later.cells()[i] != earlier.cells()[i]);
                if matches && vacated {
                    moves.push((d, new.len()));
                    break;
                }
            }
        }
    }
    moves
}

fn foreground_patterns(grid: &Grid, background: Strategy) -> Vec<Vec<usize>> {
    let (w, cells) = (grid.width(), grid.cells());
    let mut seen = vec![false; cells.len()];
    let mut out = Vec::new();
    for start in 0..cells.len() {
        if seen[start] || cells[start] == background {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            for &(dx, dy) in &MOORE_OFFSETS {
                let (nx, ny) = grid.wrap(i % w, i / w, dx, dy);
                let j = ny * w + nx;
                if !seen[j] && cells[j] != background {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn detect_local_glider(by_gen: &BTreeMap<usize, &Grid>, opts: &GliderOptions) -> Option<Glider> {
    for p in 1..=opts.max_period {
        let mut previous: Option<(usize, Vec<((usize, usize), usize)>)> = None;
        for (&g, &grid) in by_gen {
            let Some(&later) = by_gen.get(&(g + p)) else {
                previous = None;
                continue;
            };
            let moves = pattern_moves(grid, later, opts.min_pattern_cells, p);
            if let Some((pg, prev_moves)) = &previous {
                if pg + 1 == g {
                    if let Some(&(d, cells)) = moves.iter().find(|m| prev_moves.iter().any(|pm| pm.0 == m.0)) {
                        return Some(Glider {
                            period: p,
                            displacement: (signed_offset(d.0, grid.width()), signed_offset(d.1, grid.height())),
                            generation: *pg,
                            cells,
                        });
                    }
                }
            }
            previous = if moves.is_empty() { None } else { Some((g, moves)) };
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeLabel {
    DefectionSpreads,
    CooperationSpreads,
    AbstinenceSpreads,
    StructurallyStable,
    AbstainersInvaded,
    Mixed,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 6] = [
        OutcomeLabel::DefectionSpreads,
        OutcomeLabel::CooperationSpreads,
        OutcomeLabel::AbstinenceSpreads,
        OutcomeLabel::StructurallyStable,
        OutcomeLabel::AbstainersInvaded,
        OutcomeLabel::Mixed,
    ];
}

/// Thresholds that turn a terminal state into an [`OutcomeLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutcomeThresholds {
    /// Share of C needed for cooperation to count as spread.
    pub cooperation_share: f64,
    /// Share of D among non-C cells needed for defection to count as spread.
    pub defection_share: f64,
    /// Growth over the seeded count, as a share of all cells, that makes a
    /// plurality count as spread. Taking over every cell always counts.
    pub spread_gain: f64,
}

impl Default for OutcomeThresholds {
    fn default() -> Self {
        OutcomeThresholds {
            cooperation_share: 0.99,
            defection_share: 0.99,
            spread_gain: 0.05,
        }
    }
}

fn settled(eq: &EquilibriumReport) -> bool {
    matches!(eq.kind, EquilibriumKind::FixedPoint | EquilibriumKind::Cycle(_))
}

/// Checked in order: cooperation spreads, defection spreads, abstinence
/// spreads, abstainers invaded, structurally stable, mixed.
pub fn classify_outcome(traj: &Trajectory, equilibrium: &EquilibriumReport) -> OutcomeLabel {
    classify_outcome_with(traj, equilibrium, &OutcomeThresholds::default())
}

pub fn classify_outcome_with(
    traj: &Trajectory,
    equilibrium: &EquilibriumReport,
    thresholds: &OutcomeThresholds,
) -> OutcomeLabel {
    use Strategy::*;
    let seed = traj.initial_census();
    let end = traj.terminal_census();
    let total = end.total().max(1) as f64;
    let plurality = end.strict_plurality();

    let spread = |s: Strategy| {
        let (before, after) = (seed.count(s), end.count(s));
        after > before
            && (end.homogeneous() == Some(s) || (after - before) as f64 >= thresholds.spread_gain * total)
    };

    if end.n_c as f64 >= thresholds.cooperation_share * total {
        return OutcomeLabel::CooperationSpreads;
    }
    let non_c = (end.n_d + end.n_a) as f64;
    if plurality == Some(Defect) && spread(Defect) && end.n_d as f64 >= thresholds.defection_share * non_c {
        return OutcomeLabel::DefectionSpreads;
    }
    if plurality == Some(Abstain) && spread(Abstain) {
        return OutcomeLabel::AbstinenceSpreads;
    }
    if seed.n_a > 0 && end.n_a < seed.n_a && end.n_c > 0 {
        let c_inside_d = traj
            .terminal_grid()
            .map(|g| find_clusters(g, Cooperate).clusters.iter().any(|c| c.defector_enclosed))
            .unwrap_or(end.n_d > 0);
        if c_inside_d {
            return OutcomeLabel::AbstainersInvaded;
        }
    }
    if settled(equilibrium) && end.present() == 3 {
        return OutcomeLabel::StructurallyStable;
    }
    OutcomeLabel::Mixed
}

/// Per-run facts needed for batch statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub censuses: Vec<StrategyCensus>,
    pub equilibrium: EquilibriumReport,
    pub label: OutcomeLabel,
    pub glider: Option<Glider>,
    /// Smallest cooperator component in the terminal grid.
    pub min_c_cluster: Option<usize>,
    /// Smallest cooperator component whose whole outer rim is defectors.
    pub min_enclosed_c_cluster: Option<usize>,
    pub c_clusters: usize,
}

impl RunAnalysis {
    pub fn terminal_census(&self) -> StrategyCensus {
        self.censuses.last().copied().unwrap_or_default()
    }

    pub fn cooperation_survives(&self) -> bool {
        self.terminal_census().n_c > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    pub max_period: usize,
    pub glider: GliderOptions,
    pub detect_gliders: bool,
    pub thresholds: OutcomeThresholds,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            max_period: DEFAULT_MAX_PERIOD,
            glider: GliderOptions::default(),
            detect_gliders: true,
            thresholds: OutcomeThresholds::default(),
        }
    }
}

pub fn analyze_run(traj: &Trajectory, opts: &AnalysisOptions) -> RunAnalysis {
    let equilibrium = detect_equilibrium(traj, opts.max_period);
    let label = classify_outcome_with(traj, &equilibrium, &opts.thresholds);
    let glider = if opts.detect_gliders && traj.terminal_grid().is_some() {
        detect_glider_with(traj, &opts.glider)
    } else {
        None
    };
    let (min_c_cluster, min_enclosed_c_cluster, c_clusters) = match traj.terminal_grid() {
        Some(g) => {
            let report = find_clusters(g, Strategy::Cooperate);
            let enclosed = report
                .clusters
                .iter()
                .filter(|c| c.defector_enclosed)
                .map(|c| c.size)
                .min();
            (report.min_size(), enclosed, report.clusters.len())
        }
        None => (None, None, 0),
    };
    RunAnalysis {
        censuses: traj.censuses.clone(),
        equilibrium,
        label,
        glider,
        min_c_cluster,
        min_enclosed_c_cluster,
        c_clusters,
    }
}

/// Batch statistics over runs sharing one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub runs: usize,
    /// Per generation mean (C, D, A) counts; finished runs hold their last
    /// census.
    pub mean_census: Vec<[f64; 3]>,
    pub outcome_counts: BTreeMap<OutcomeLabel, usize>,
    /// Runs whose terminal census has a strict plurality of each strategy,
    /// keyed `C`, `D`, `A`.
    pub plurality_counts: BTreeMap<Strategy, usize>,
    /// Runs ending with every member playing one strategy.
    pub homogeneous_counts: BTreeMap<Strategy, usize>,
    pub cooperation_survival: f64,
    pub fixed_points: usize,
    pub cycles: BTreeMap<usize, usize>,
    pub not_converged: usize,
    pub gliders: usize,
    pub min_surviving_c_cluster: Option<usize>,
    pub min_enclosed_c_cluster: Option<usize>,
}

impl BatchSummary {
    pub fn plurality_fraction(&self, s: Strategy) -> f64 {
        *self.plurality_counts.get(&s).unwrap_or(&0) as f64 / self.runs as f64
    }

    pub fn homogeneous_fraction(&self, s: Strategy) -> f64 {
        *self.homogeneous_counts.get(&s).unwrap_or(&0) as f64 / self.runs as f64
    }

    pub fn outcome_fraction(&self, label: OutcomeLabel) -> f64 {
        *self.outcome_counts.get(&label).unwrap_or(&0) as f64 / self.runs as f64
    }
}

pub fn aggregate_runs(trajectories: &[Trajectory], opts: &AnalysisOptions) -> Result<BatchSummary> {
    let analyses: Vec<RunAnalysis> = trajectories.iter().map(|t| analyze_run(t, opts)).collect();
    aggregate_analyses(&analyses)
}

pub fn aggregate_analyses(runs: &[RunAnalysis]) -> Result<BatchSummary> {
    if runs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let len = runs.iter().map(|r| r.censuses.len()).max().unwrap_or(0);
    let mut sums = vec![[0.0f64; 3]; len];
    for r in runs {
        let last = r.terminal_census();
        for (g, slot) in sums.iter_mut().enumerate() {
            let c = r.censuses.get(g).copied().unwrap_or(last);
            slot[0] += c.n_c as f64;
            slot[1] += c.n_d as f64;
            slot[2] += c.n_a as f64;
        }
    }
    let n = runs.len() as f64;
    let mean_census = sums
        .into_iter()
        .map(|s| [s[0] / n, s[1] / n, s[2] / n])
        .collect();

    let mut outcome_counts: BTreeMap<OutcomeLabel, usize> = OutcomeLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let mut plurality_counts: BTreeMap<Strategy, usize> = Strategy::ALL.iter().map(|&s| (s, 0)).collect();
    let mut homogeneous_counts = plurality_counts.clone();
    let mut cycles = BTreeMap::new();
    let (mut fixed_points, mut not_converged, mut gliders, mut survivors) = (0, 0, 0, 0);
    for r in runs {
        *outcome_counts.entry(r.label).or_default() += 1;
        let end = r.terminal_census();
        if let Some(s) = end.strict_plurality() {
            *plurality_counts.entry(s).or_default() += 1;
        }
        if let Some(s) = end.homogeneous() {
            *homogeneous_counts.entry(s).or_default() += 1;
        }
        match r.equilibrium.kind {
            EquilibriumKind::FixedPoint => fixed_points += 1,
            EquilibriumKind::Cycle(p) => *cycles.entry(p).or_default() += 1,
            EquilibriumKind::NotConverged => not_converged += 1,
        }
        gliders += r.glider.is_some() as usize;
        survivors += r.cooperation_survives() as usize;
    }
    Ok(BatchSummary {
        runs: runs.len(),
        mean_census,
        outcome_counts,
        plurality_counts,
        homogeneous_counts,
        cooperation_survival: survivors as f64 / n,
        fixed_points,
        cycles,
        not_converged,
        gliders,
        min_surviving_c_cluster: runs.iter().filter_map(|r| r.min_c_cluster).min(),
        min_enclosed_c_cluster: runs.iter().filter_map(|r| r.min_enclosed_c_cluster).min(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PayoffTable;
    use crate::lattice::{run_lattice, LatticeParams};
    use Strategy::*;

    fn grid_from(rows: &[&str]) -> Grid {
        let cells = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| Strategy::from_char(c).unwrap()))
            .collect();
        Grid::from_cells(rows[0].len(), rows.len(), cells).unwrap()
    }

    fn block(width: usize, height: usize, x0: usize, y0: usize, side: usize, inside: Strategy, rest: Strategy) -> Grid {
        let mut g = Grid::filled(width, height, rest);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                g.set(x % width, y % height, inside);
            }
        }
        g
    }

    #[test]
    fn fnv_matches_reference_vector() {
        let mut h = Fnv1a::new();
        for b in b"a" {
            h.write_u8(*b);
        }
        assert_eq!(h.finish(), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn homogeneous_grid_is_fixed_at_zero() {
        let t = run_lattice(Grid::filled(10, 10, Abstain), &PayoffTable::standard(1.5), &LatticeParams::default()).unwrap();
        let eq = detect_equilibrium(&t, DEFAULT_MAX_PERIOD);
        assert_eq!(eq.kind, EquilibriumKind::FixedPoint);
        assert_eq!(eq.onset_generation, 0);
    }

    #[test]
    fn two_state_alternation_is_a_two_cycle() {
        let a = block(8, 8, 2, 2, 2, Cooperate, Abstain);
        let b = block(8, 8, 2, 2, 3, Defect, Abstain);
        let c = Grid::filled(8, 8, Abstain);
        let frames = vec![c, a.clone(), b.clone(), a.clone(), b.clone(), a.clone(), b];
        let eq = detect_equilibrium(&Trajectory::from_grids(&frames), DEFAULT_MAX_PERIOD);
        assert_eq!(eq.kind, EquilibriumKind::Cycle(2));
        assert_eq!(eq.onset_generation, 1);
    }

    #[test]
    fn hash_collision_cannot_mint_a_cycle() {
        let a = block(8, 8, 2, 2, 2, Cooperate, Abstain);
        let b = block(8, 8, 2, 2, 3, Defect, Abstain);
        let d = block(8, 8, 4, 4, 3, Defect, Abstain);
        let mut t = Trajectory::from_grids(&[a.clone(), b, a.clone(), d, a.clone()]);
        // Pretend generation 3 collided with generation 1.
        t.hashes[3] = t.hashes[1];
        t.hashes.push(t.hashes[1]);
        t.snapshots.push(Snapshot::new(5, block(8, 8, 0, 0, 1, Defect, Abstain)));
        assert_eq!(detect_equilibrium(&t, DEFAULT_MAX_PERIOD).kind, EquilibriumKind::NotConverged);
    }

    #[test]
    fn changing_trajectory_is_open() {
        let frames: Vec<Grid> = (0..5).map(|i| block(10, 10, i, 0, 1, Defect, Abstain)).collect();
        let frames: Vec<Grid> = frames.into_iter().enumerate().map(|(i, mut g)| {
            g.set(9, 9 - i, Cooperate);
            g
        }).collect();
        let eq = detect_equilibrium(&Trajectory::from_grids(&frames), DEFAULT_MAX_PERIOD);
        assert_eq!(eq.kind, EquilibriumKind::NotConverged);
    }

    #[test]
    fn three_by_three_block_is_one_cluster_of_nine() {
        let g = block(10, 10, 4, 4, 3, Cooperate, Defect);
        let r = find_clusters(&g, Cooperate);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].size, 9);
        assert!(r.clusters[0].defector_enclosed);
        assert_eq!(
            r.clusters[0].bounds,
            BoundingBox {
                min_x: 4,
                min_y: 4,
                max_x: 6,
                max_y: 6
            }
        );
    }

    #[test]
    fn no_cooperators_no_clusters() {
        let r = find_clusters(&Grid::filled(5, 5, Defect), Cooperate);
        assert!(r.clusters.is_empty());
        assert_eq!(r.min_size(), None);
    }

    #[test]
    fn diagonal_contact_joins_only_under_moore() {
        let g = grid_from(&["CAAAA", "ACAAA", "AAAAA", "AAAAA", "AAAAA"]);
        assert_eq!(find_clusters_with(&g, Cooperate, Connectivity::Eight).clusters.len(), 1);
        assert_eq!(find_clusters_with(&g, Cooperate, Connectivity::Four).clusters.len(), 2);
    }

    #[test]
    fn clusters_wrap_around_the_torus() {
        let g = block(6, 6, 5, 5, 2, Cooperate, Abstain);
        let r = find_clusters(&g, Cooperate);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].size, 4);
        assert!(!r.clusters[0].defector_enclosed);
    }

    #[test]
    fn translated_frames_are_a_glider() {
        let base = grid_from(&["CDAAAA", "DDAAAA", "AAAAAA", "AAAAAA", "AAAAAA", "AAAAAA"]);
        let frames: Vec<Grid> = (0..4).map(|i| base.translated(i, 0)).collect();
        let g = detect_glider(&Trajectory::from_grids(&frames), DEFAULT_GLIDER_PERIOD).unwrap();
        assert_eq!(g.period, 1);
        assert_eq!(g.displacement, (1, 0));
        assert_eq!(g.generation, 0);
    }

    #[test]
    fn leftward_motion_has_negative_displacement() {
        let base = grid_from(&["CDAAAA", "DDAAAA", "AAAAAA", "AAAAAA", "AAAAAA", "AAAAAA"]);
        let frames: Vec<Grid> = (0..4).map(|i| base.translated(-(i as isize), -(i as isize))).collect();
        let g = detect_glider(&Trajectory::from_grids(&frames), DEFAULT_GLIDER_PERIOD).unwrap();
        assert_eq!(g.displacement, (-1, -1));
    }

    #[test]
    fn still_life_is_not_a_glider() {
        let g = block(10, 10, 4, 4, 3, Cooperate, Defect);
        let t = Trajectory::from_grids(&[g.clone(), g.clone(), g.clone(), g]);
        assert_eq!(detect_glider(&t, DEFAULT_GLIDER_PERIOD), None);
        let homogeneous = Grid::filled(6, 6, Abstain);
        let t = Trajectory::from_grids(&vec![homogeneous; 5]);
        assert_eq!(detect_glider(&t, DEFAULT_GLIDER_PERIOD), None);
    }

    #[test]
    fn moving_pattern_in_a_static_background() {
        let mut frames = Vec::new();
        for i in 0..5 {
            let mut g = Grid::filled(20, 20, Abstain);
            // A still pair far away and a 2x2 mover.
            g.set(15, 15, Defect);
            g.set(16, 15, Cooperate);
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                g.set(2 + i + dx, 2 + dy, if dx == 0 { Defect } else { Cooperate });
            }
            frames.push(g);
        }
        let t = Trajectory::from_grids(&frames);
        assert_eq!(
            detect_glider_with(&t, &GliderOptions { local_patterns: false, ..GliderOptions::default() }),
            None
        );
        let g = detect_glider(&t, DEFAULT_GLIDER_PERIOD).unwrap();
        assert_eq!((g.period, g.displacement, g.cells), (1, (1, 0), 4));
    }

    fn wellmixed_traj(censuses: &[StrategyCensus]) -> Trajectory {
        let mut t = Trajectory::new(Dynamics::Stochastic);
        for c in censuses {
            t.record(*c, crate::wellmixed::census_hash(c));
        }
        if censuses.last().unwrap().homogeneous().is_some() {
            t.successor_hash = t.hashes.last().copied();
        }
        t
    }

    #[test]
    fn all_abstainers_is_abstinence_spreading() {
        let t = wellmixed_traj(&[StrategyCensus::new(0, 50, 50), StrategyCensus::new(0, 0, 100)]);
        let eq = detect_equilibrium(&t, DEFAULT_MAX_PERIOD);
        assert_eq!(eq.kind, EquilibriumKind::FixedPoint);
        assert_eq!(classify_outcome(&t, &eq), OutcomeLabel::AbstinenceSpreads);
    }

    #[test]
    fn lone_cooperator_taking_over_is_cooperation_spreading() {
        let t = wellmixed_traj(&[StrategyCensus::new(1, 0, 99), StrategyCensus::new(100, 0, 0)]);
        let eq = detect_equilibrium(&t, DEFAULT_MAX_PERIOD);
        assert_eq!(classify_outcome(&t, &eq), OutcomeLabel::CooperationSpreads);
    }

    #[test]
    fn abstainers_reclaiming_everything_counts_as_spread() {
        let t = wellmixed_traj(&[StrategyCensus::new(1, 0, 99), StrategyCensus::new(0, 0, 100)]);
        let eq = detect_equilibrium(&t, DEFAULT_MAX_PERIOD);
        assert_eq!(classify_outcome(&t, &eq), OutcomeLabel::AbstinenceSpreads);
    }

    #[test]
    fn small_gain_is_not_spreading() {
        let a = block(20, 20, 5, 5, 3, Cooperate, Abstain);
        let mut b = a.clone();
        b.set(0, 0, Defect);
        b.set(0, 1, Defect);
        let mut c = b.clone();
        c.set(10, 10, Abstain);
        let t = Trajectory::from_grids(&[a, b, c.clone(), c]);
        let eq = detect_equilibrium(&t, DEFAULT_MAX_PERIOD);
        assert_eq!(eq.kind, EquilibriumKind::FixedPoint);
        assert_eq!(classify_outcome(&t, &eq), OutcomeLabel::StructurallyStable);
    }

    #[test]
    fn aggregate_of_identical_runs() {
        let t = wellmixed_traj(&[StrategyCensus::new(50, 0, 50), StrategyCensus::new(100, 0, 0)]);
        let s = aggregate_runs(&[t.clone(), t.clone(), t], &AnalysisOptions::default()).unwrap();
        assert_eq!(s.runs, 3);
        assert_eq!(s.mean_census, vec![[50.0, 0.0, 50.0], [100.0, 0.0, 0.0]]);
        assert_eq!(s.outcome_fraction(OutcomeLabel::CooperationSpreads), 1.0);
        assert_eq!(s.homogeneous_fraction(Cooperate), 1.0);
        assert_eq!(s.cooperation_survival, 1.0);
        assert_eq!(s.fixed_points, 3);
        assert_eq!(s.outcome_counts.values().sum::<usize>(), 3);
    }

    #[test]
    fn shorter_runs_hold_their_last_census() {
        let short = wellmixed_traj(&[StrategyCensus::new(0, 0, 4)]);
        let long = wellmixed_traj(&[StrategyCensus::new(2, 0, 2), StrategyCensus::new(4, 0, 0)]);
        let s = aggregate_runs(&[short, long], &AnalysisOptions::default()).unwrap();
        assert_eq!(s.mean_census, vec![[1.0, 0.0, 3.0], [2.0, 0.0, 2.0]]);
        assert_eq!(s.cooperation_survival, 0.5);
    }

    #[test]
    fn empty_batch() {
        assert!(matches!(aggregate_runs(&[], &AnalysisOptions::default()), Err(Error::EmptyBatch)));
    }
}
