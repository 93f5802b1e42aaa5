//! Evolutionary simulation of the Prisoner's Dilemma with an abstain
//! option, in well-mixed populations and on a toroidal lattice.

pub mod analysis;
pub mod error;
pub mod game;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod seeding;
pub mod wellmixed;

pub use error::{Error, GameError, Result};
pub use game::{payoff_pair, validate_table, PayoffTable, Strategy, StrategyCensus};
pub use lattice::Grid;
pub use wellmixed::Population;
