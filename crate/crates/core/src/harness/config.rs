//! Experiment configuration documents.
//!
//! Configs are TOML. Every section is optional except `environment`,
//! `L_values` and at least one `[[seed]]`:
//!
//! ```toml
//! name = "thirds"
//! environment = "lattice"          # or "wellmixed"
//! L_values = [0.5, 1.5]
//! runs = 100
//! max_generations = 1000
//! master_seed = 1
//! report_generation = 50           # optional extra census readout
//!
//! [payoffs]                        # T, R, P, S; L comes from L_values
//! T = 5.0
//!
//! [[seed]]
//! kind = "uniform_random"
//! strategies = ["C", "D", "A"]
//!
//! [wellmixed]
//! size = 100
//! mode = { kind = "round_robin" }  # or { kind = "sampled", games_per_agent = 10 }
//! tournament = { size = 2, with_replacement = false }
//!
//! [lattice]
//! width = 100
//! height = 100
//! include_self = true
//! tie_rule = "keep_own_then_scan"
//! snapshots = { kind = "periodic", every = 10 }
//!
//! [analysis]
//! max_period = 20
//!
//! [output]
//! dir = "out"
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisOptions;
use crate::error::{Error, Result};
use crate::game::{PayoffTable, StrategyCensus};
use crate::lattice::{ImitationRule, LatticeParams, SnapshotPolicy, TieRule};
use crate::seeding::{SeedSpec, SeedTarget, SeedVariant};
use crate::wellmixed::{InteractionMode, TournamentParams, WellMixedParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    WellMixed,
    Lattice,
}

/// The loner-free part of the payoff table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Payoffs {
    #[serde(rename = "T")]
    pub temptation: f64,
    #[serde(rename = "R")]
    pub reward: f64,
    #[serde(rename = "P")]
    pub punishment: f64,
    #[serde(rename = "S")]
    pub sucker: f64,
}

impl Default for Payoffs {
    fn default() -> Self {
        let t = PayoffTable::standard(1.0);
        Payoffs {
            temptation: t.temptation,
            reward: t.reward,
            punishment: t.punishment,
            sucker: t.sucker,
        }
    }
}

impl Payoffs {
    pub fn with_loner(&self, loner: f64) -> PayoffTable {
        PayoffTable {
            temptation: self.temptation,
            reward: self.reward,
            punishment: self.punishment,
            sucker: self.sucker,
            loner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WellMixedSection {
    pub size: usize,
    pub mode: InteractionMode,
    pub tournament: TournamentParams,
}

impl Default for WellMixedSection {
    fn default() -> Self {
        WellMixedSection {
            size: 100,
            mode: InteractionMode::RoundRobin,
            tournament: TournamentParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    pub width: usize,
    pub height: usize,
    pub include_self: bool,
    pub tie_rule: TieRule,
    pub snapshots: SnapshotPolicy,
    /// Trailing frames kept for cycle confirmation and glider search.
    pub window: usize,
}

impl Default for LatticeSection {
    fn default() -> Self {
        let rule = ImitationRule::default();
        LatticeSection {
            width: 100,
            height: 100,
            include_self: rule.include_self,
            tie_rule: rule.tie_rule,
            snapshots: SnapshotPolicy::default(),
            window: LatticeParams::default().window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub census: String,
    pub summary: String,
    pub snapshots: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            census: "census.csv".into(),
            summary: "summary.json".into(),
            snapshots: "snapshots".into(),
        }
    }
}

fn default_runs() -> usize {
    100
}

fn default_max_generations() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub environment: Environment,
    #[serde(rename = "seed")]
    pub seeds: Vec<SeedVariant>,
    #[serde(default)]
    pub payoffs: Payoffs,
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_max_generations")]
    pub max_generations: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Generation at which the summary additionally reports censuses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_generation: Option<usize>,
    #[serde(default)]
    pub wellmixed: WellMixedSection,
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub output: OutputSection,
}

/// One (seed variant, L) combination of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentCell {
    pub seed_index: usize,
    pub l_index: usize,
    pub spec: SeedSpec,
    pub table: PayoffTable,
}

impl ExperimentConfig {
    pub fn target(&self) -> SeedTarget {
        match self.environment {
            Environment::WellMixed => SeedTarget::WellMixed {
                size: self.wellmixed.size,
            },
            Environment::Lattice => SeedTarget::Lattice {
                width: self.lattice.width,
                height: self.lattice.height,
            },
        }
    }

    pub fn wellmixed_params(&self) -> WellMixedParams {
        WellMixedParams {
            max_generations: self.max_generations,
            mode: self.wellmixed.mode,
            tournament: self.wellmixed.tournament,
        }
    }

    pub fn lattice_params(&self) -> LatticeParams {
        LatticeParams {
            max_generations: self.max_generations,
            rule: ImitationRule {
                include_self: self.lattice.include_self,
                tie_rule: self.lattice.tie_rule,
            },
            snapshots: self.lattice.snapshots,
            max_period: self.analysis.max_period,
            window: self.lattice.window,
        }
    }

    /// Seed-major list of experiment cells.
    pub fn cells(&self) -> Vec<ExperimentCell> {
        let target = self.target();
        let mut cells = Vec::with_capacity(self.seeds.len() * self.l_values.len());
        for (seed_index, variant) in self.seeds.iter().enumerate() {
            for (l_index, &l) in self.l_values.iter().enumerate() {
                cells.push(ExperimentCell {
                    seed_index,
                    l_index,
                    spec: SeedSpec {
                        variant: variant.clone(),
                        target,
                    },
                    table: self.payoffs.with_loner(l),
                });
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::validation("runs", "must be at least 1"));
        }
        if self.max_generations == 0 {
            return Err(Error::validation("max_generations", "must be at least 1"));
        }
        if self.l_values.is_empty() {
            return Err(Error::validation("L_values", "at least one L is required"));
        }
        for &l in &self.l_values {
            if let Err(e) = self.payoffs.with_loner(l).validate() {
                return Err(Error::validation("L", format!("{l}: {e}")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("seed", "at least one [[seed]] is required"));
        }
        let labels: BTreeSet<String> = self.seeds.iter().map(|s| s.label()).collect();
        if labels.len() != self.seeds.len() {
            return Err(Error::validation("seed", "seed variants must be distinct"));
        }
        if self.analysis.max_period < 2 {
            return Err(Error::validation("analysis.max_period", "must be at least 2"));
        }
        match self.environment {
            Environment::WellMixed => {
                if self.wellmixed.size < 2 {
                    return Err(Error::validation("wellmixed.size", "must be at least 2"));
                }
                if let InteractionMode::Sampled { games_per_agent } = self.wellmixed.mode {
                    if games_per_agent == 0 || games_per_agent >= self.wellmixed.size {
                        return Err(Error::validation(
                            "wellmixed.mode.games_per_agent",
                            format!("must lie in 1..{}", self.wellmixed.size),
                        ));
                    }
                }
                let t = self.wellmixed.tournament;
                if t.size == 0 || (!t.with_replacement && t.size > self.wellmixed.size) {
                    return Err(Error::validation(
                        "wellmixed.tournament.size",
                        format!("{} entrants from {} members", t.size, self.wellmixed.size),
                    ));
                }
            }
            Environment::Lattice => {
                if self.lattice.width < 3 || self.lattice.height < 3 {
                    return Err(Error::validation("lattice", "width and height must be at least 3"));
                }
                if let SnapshotPolicy::Periodic { every: 0 } = self.lattice.snapshots {
                    return Err(Error::validation("lattice.snapshots.every", "must be at least 1"));
                }
            }
        }
        let cells = self.target().cells();
        for variant in &self.seeds {
            match variant {
                SeedVariant::UniformRandom { strategies } if strategies.is_empty() => {
                    return Err(Error::validation("seed.strategies", "must not be empty"));
                }
                SeedVariant::ExactCounts { n_c, n_d, n_a } => {
                    let total = StrategyCensus::new(*n_c, *n_d, *n_a).total();
                    if total != cells {
                        return Err(Error::validation(
                            "seed",
                            format!("counts sum to {total} but the environment has {cells} members"),
                        ));
                    }
                }
                SeedVariant::NestedRings(rings) => {
                    if self.environment != Environment::Lattice {
                        return Err(Error::validation("seed", "nested_rings needs the lattice environment"));
                    }
                    let block = rings.block_side();
                    if block >= self.lattice.width.min(self.lattice.height) {
                        return Err(Error::validation(
                            "seed",
                            format!("a ring block of side {block} does not fit the lattice"),
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("line {line}, column {col}")
}

fn parse_error(text: &str, e: toml::de::Error) -> Error {
    Error::Parse {
        location: e.span().map_or_else(|| "document".to_string(), |s| line_col(text, s.start)),
        message: e.message().to_string(),
    }
}

/// Parses the document into a table without interpreting it.
pub fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| parse_error(text, e))
}

/// Recursively lays `overlay` over `base`. Tables merge key by key; any
/// other value, arrays included, replaces the base value.
pub fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

pub fn config_from_table(table: toml::Table) -> Result<ExperimentConfig> {
    let text = toml::to_string(&table).map_err(|e| Error::Parse {
        location: "document".into(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

/// Parses and validates a config document, filling in defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::NestedRings;

    const MINIMAL: &str = r#"
environment = "lattice"
L_values = [1.5]

[[seed]]
kind = "uniform_random"
strategies = ["C", "D", "A"]
"#;

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.runs, 100);
        assert_eq!(c.max_generations, 1000);
        assert_eq!((c.lattice.width, c.lattice.height), (100, 100));
        assert_eq!(c.wellmixed.size, 100);
        assert_eq!(c.seeds, vec![SeedVariant::thirds()]);
        assert_eq!(c.payoffs, Payoffs::default());
        assert_eq!(c.lattice.snapshots, SnapshotPolicy::Periodic { every: 10 });
        assert_eq!(c.cells().len(), 1);
    }

    #[test]
    fn loner_out_of_band() {
        let text = MINIMAL.replace("[1.5]", "[3.5]");
        match parse_config(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "L"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn six_rings_two_loners() {
        let mut text = String::from("environment = \"lattice\"\nL_values = [0.5, 1.5]\nruns = 1\n");
        for r in NestedRings::permutations() {
            text += &format!(
                "[[seed]]\nkind = \"nested_rings\"\ninner = \"{}\"\nmiddle = \"{}\"\nouter = \"{}\"\n",
                r.inner, r.middle, r.outer
            );
        }
        let c = parse_config(&text).unwrap();
        assert_eq!(c.cells().len(), 12);
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let text = format!("{MINIMAL}\n[lattice]\nwidht = 10\n");
        match parse_config(&text) {
            Err(Error::Parse { location, message }) => {
                assert!(location.starts_with("line 10"), "{location}");
                assert!(message.contains("widht"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error() {
        assert!(matches!(parse_config("environment = "), Err(Error::Parse { .. })));
    }

    #[test]
    fn counts_must_fill_population() {
        let text = r#"
environment = "wellmixed"
L_values = [1.0]
[[seed]]
kind = "exact_counts"
n_c = 1
n_d = 0
n_a = 98
"#;
        assert!(matches!(parse_config(text), Err(Error::Validation { .. })));
    }

    #[test]
    fn rings_need_lattice() {
        let text = r#"
environment = "wellmixed"
L_values = [1.0]
[[seed]]
kind = "nested_rings"
inner = "C"
middle = "A"
outer = "D"
"#;
        assert!(matches!(parse_config(text), Err(Error::Validation { .. })));
    }

    #[test]
    fn zero_runs() {
        let text = format!("runs = 0\n{MINIMAL}");
        assert!(matches!(parse_config(&text), Err(Error::Validation { field, .. }) if field == "runs"));
    }

    #[test]
    fn overlay_replaces_leaves_and_keeps_siblings() {
        let mut base = parse_table("a = 1\n[s]\nx = 1\ny = 2\n").unwrap();
        merge_tables(&mut base, parse_table("[s]\ny = 3\n").unwrap());
        assert_eq!(base["a"].as_integer(), Some(1));
        assert_eq!(base["s"]["x"].as_integer(), Some(1));
        assert_eq!(base["s"]["y"].as_integer(), Some(3));
    }
}
