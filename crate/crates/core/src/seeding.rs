//! Initial conditions for both environments.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Strategy, StrategyCensus};
use crate::lattice::Grid;
use crate::wellmixed::Population;

/// Which environment an initial condition fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeedTarget {
    WellMixed { size: usize },
    Lattice { width: usize, height: usize },
}

impl SeedTarget {
    pub fn cells(&self) -> usize {
        match *self {
            SeedTarget::WellMixed { size } => size,
            SeedTarget::Lattice { width, height } => width * height,
        }
    }
}

/// Inner block, surrounding rings and remainder strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedRings {
    pub inner: Strategy,
    pub middle: Strategy,
    pub outer: Strategy,
    #[serde(default = "NestedRings::default_inner_side")]
    pub inner_side: usize,
    #[serde(default = "NestedRings::default_middle_layers")]
    pub middle_layers: usize,
}

impl NestedRings {
    fn default_inner_side() -> usize {
        3
    }

    fn default_middle_layers() -> usize {
        3
    }

    pub fn new(inner: Strategy, middle: Strategy, outer: Strategy) -> Self {
        NestedRings {
            inner,
            middle,
            outer,
            inner_side: 3,
            middle_layers: 3,
        }
    }

    /// Parses an inner-middle-outer label such as `CAD`.
    pub fn from_label(label: &str) -> Option<Self> {
        let mut it = label.chars().map(Strategy::from_char);
        match (it.next(), it.next(), it.next(), it.next()) {
            (Some(Some(i)), Some(Some(m)), Some(Some(o)), None) => Some(Self::new(i, m, o)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        [self.inner, self.middle, self.outer]
            .iter()
            .map(|s| s.as_char())
            .collect()
    }

    /// The six arrangements of C, D and A in table order.
    pub fn permutations() -> [NestedRings; 6] {
        ["DCA", "DAC", "CDA", "CAD", "ACD", "ADC"].map(|l| Self::from_label(l).unwrap())
    }

    pub fn block_side(&self) -> usize {
        self.inner_side + 2 * self.middle_layers
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SeedVariant {
    UniformRandom { strategies: Vec<Strategy> },
    ExactCounts { n_c: usize, n_d: usize, n_a: usize },
    NestedRings(NestedRings),
}

impl SeedVariant {
    pub fn thirds() -> Self {
        SeedVariant::UniformRandom {
            strategies: Strategy::ALL.to_vec(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SeedVariant::UniformRandom { strategies } => {
                let s: String = strategies.iter().map(|s| s.as_char()).collect();
                format!("uniform-{s}")
            }
            SeedVariant::ExactCounts { n_c, n_d, n_a } => format!("counts-{n_c}C{n_d}D{n_a}A"),
            SeedVariant::NestedRings(r) => r.label(),
        }
    }
}

impl fmt::Display for SeedVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub variant: SeedVariant,
    pub target: SeedTarget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seeded {
    Population(Population),
    Grid(Grid),
}

impl Seeded {
    pub fn census(&self) -> StrategyCensus {
        match self {
            Seeded::Population(p) => p.census(),
            Seeded::Grid(g) => g.census(),
        }
    }

    fn from_cells(target: SeedTarget, cells: Vec<Strategy>) -> Result<Self> {
        Ok(match target {
            SeedTarget::WellMixed { .. } => Seeded::Population(Population::new(cells)),
            SeedTarget::Lattice { width, height } => Seeded::Grid(Grid::from_cells(width, height, cells)?),
        })
    }
}

pub fn seed<R: Rng + ?Sized>(spec: &SeedSpec, rng: &mut R) -> Result<Seeded> {
    match &spec.variant {
        SeedVariant::UniformRandom { strategies } => seed_uniform_random(strategies, spec.target, rng),
        SeedVariant::ExactCounts { n_c, n_d, n_a } => {
            seed_exact_counts(StrategyCensus::new(*n_c, *n_d, *n_a), spec.target, rng)
        }
        SeedVariant::NestedRings(rings) => match spec.target {
            SeedTarget::Lattice { width, height } => Ok(Seeded::Grid(seed_nested_rings(rings, width, height)?)),
            SeedTarget::WellMixed { .. } => Err(Error::InvalidSeed(
                "nested rings need a lattice".into(),
            )),
        },
    }
}

/// Every site drawn independently and uniformly from `strategies`.
pub fn seed_uniform_random<R: Rng + ?Sized>(
    strategies: &[Strategy],
    target: SeedTarget,
    rng: &mut R,
) -> Result<Seeded> {
    if strategies.is_empty() {
        return Err(Error::InvalidSeed("empty strategy set".into()));
    }
    let cells = (0..target.cells())
        .map(|_| strategies[rng.gen_range(0..strategies.len())])
        .collect();
    Seeded::from_cells(target, cells)
}

/// The exact multiset `counts`, shuffled into place.
pub fn seed_exact_counts<R: Rng + ?Sized>(
    counts: StrategyCensus,
    target: SeedTarget,
    rng: &mut R,
) -> Result<Seeded> {
    if counts.total() != target.cells() {
        return Err(Error::CountMismatch {
            expected: target.cells(),
            got: counts.total(),
        });
    }
    let mut cells = Population::from_census(counts).members;
    cells.shuffle(rng);
    Seeded::from_cells(target, cells)
}

/// Centred square of `inner`, `middle_layers` one-cell rings of `middle`
/// around it, `outer` everywhere else.
pub fn seed_nested_rings(rings: &NestedRings, width: usize, height: usize) -> Result<Grid> {
    let block = rings.block_side();
    if rings.inner_side == 0 || block >= width.min(height) {
        return Err(Error::GridTooSmallForRings {
            width,
            height,
            block,
        });
    }
    let (cx, cy) = (width / 2, height / 2);
    let x0 = cx - rings.inner_side / 2;
    let y0 = cy - rings.inner_side / 2;
    let x1 = x0 + rings.inner_side - 1;
    let y1 = y0 + rings.inner_side - 1;
    // Chebyshev distance from the inner block along one axis.
    let gap = |v: usize, lo: usize, hi: usize| {
        if v < lo {
            lo - v
        } else {
            v.saturating_sub(hi)
        }
    };
    let mut grid = Grid::filled(width, height, rings.outer);
    for y in 0..height {
        for x in 0..width {
            let d = gap(x, x0, x1).max(gap(y, y0, y1));
            if d == 0 {
                grid.set(x, y, rings.inner);
            } else if d <= rings.middle_layers {
                grid.set(x, y, rings.middle);
            }
        }
    }
    Ok(grid)
}
