//! Built-in experiment definitions, one per published experiment.

use crate::error::{Error, Result};
use crate::harness::config::{config_from_table, merge_tables, parse_table, ExperimentConfig};

const FIG1A: &str = r#"
name = "fig1a"
environment = "wellmixed"
L_values = [0.9, 1.0, 1.1]
report_generation = 50

[[seed]]
kind = "exact_counts"
n_c = 0
n_d = 50
n_a = 50
"#;

const FIG1B: &str = r#"
name = "fig1b"
environment = "wellmixed"
L_values = [0.5, 1.0, 1.5, 2.0, 2.5]
report_generation = 50

[[seed]]
kind = "exact_counts"
n_c = 34
n_d = 33
n_a = 33
"#;

const FIG1C: &str = r#"
name = "fig1c"
environment = "wellmixed"
L_values = [0.5, 1.0, 1.5, 2.0, 2.5]
report_generation = 50

[[seed]]
kind = "exact_counts"
n_c = 1
n_d = 0
n_a = 99
"#;

const FIG1D: &str = r#"
name = "fig1d"
environment = "wellmixed"
L_values = [0.5, 1.0, 1.5, 2.0, 2.5]
report_generation = 50

[[seed]]
kind = "exact_counts"
n_c = 1
n_d = 1
n_a = 98
"#;

const FIG2: &str = r#"
name = "fig2"
environment = "lattice"
L_values = [0.9, 1.0, 1.1]

[[seed]]
kind = "uniform_random"
strategies = ["D", "A"]
"#;

const LATTICE_THIRDS: &str = r#"
name = "lattice-thirds"
environment = "lattice"
L_values = [0.5, 1.0, 1.1, 1.5, 1.8, 2.0]

[[seed]]
kind = "uniform_random"
strategies = ["C", "D", "A"]
"#;

const TABLE2: &str = r#"
name = "table2"
environment = "lattice"
L_values = [0.5, 1.5]
runs = 1

[[seed]]
kind = "nested_rings"
inner = "D"
middle = "C"
outer = "A"

[[seed]]
kind = "nested_rings"
inner = "D"
middle = "A"
outer = "C"

[[seed]]
kind = "nested_rings"
inner = "C"
middle = "D"
outer = "A"

[[seed]]
kind = "nested_rings"
inner = "C"
middle = "A"
outer = "D"

[[seed]]
kind = "nested_rings"
inner = "A"
middle = "C"
outer = "D"

[[seed]]
kind = "nested_rings"
inner = "A"
middle = "D"
outer = "C"
"#;

pub const PRESET_NAMES: [&str; 7] = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2", "lattice-thirds", "table2"];

/// TOML source of a preset.
pub fn preset_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig1a" => FIG1A,
        "fig1b" => FIG1B,
        "fig1c" => FIG1C,
        "fig1d" => FIG1D,
        "fig2" => FIG2,
        "lattice-thirds" => LATTICE_THIRDS,
        "table2" => TABLE2,
        _ => return None,
    })
}

fn unknown(name: &str) -> Error {
    Error::validation("preset", format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")))
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    preset_with(name, "")
}

/// A preset with the keys of `overlay` (a config document) laid over it.
pub fn preset_with(name: &str, overlay: &str) -> Result<ExperimentConfig> {
    let mut base = parse_table(preset_source(name).ok_or_else(|| unknown(name))?)?;
    merge_tables(&mut base, parse_table(overlay)?);
    config_from_table(base)
}
