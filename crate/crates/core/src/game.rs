//! Strategies and payoffs of the Prisoner's Dilemma extended with abstention.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GameError;

/// One of the three pure strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "C")]
    Cooperate,
    #[serde(rename = "D")]
    Defect,
    #[serde(rename = "A")]
    Abstain,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Cooperate, Strategy::Defect, Strategy::Abstain];

    pub fn as_char(self) -> char {
        match self {
            Strategy::Cooperate => 'C',
            Strategy::Defect => 'D',
            Strategy::Abstain => 'A',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'C' => Some(Strategy::Cooperate),
            'D' => Some(Strategy::Defect),
            'A' => Some(Strategy::Abstain),
            _ => None,
        }
    }

    /// Dense index used by census arrays: C=0, D=1, A=2.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// The strict inequality a payoff table failed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    SLessThanP,
    PLessThanR,
    RLessThanT,
    SLessThanL,
    LLessThanR,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Inequality::SLessThanP => "S<P",
            Inequality::PLessThanR => "P<R",
            Inequality::RLessThanT => "R<T",
            Inequality::SLessThanL => "S<L",
            Inequality::LLessThanR => "L<R",
        };
        f.write_str(s)
    }
}

/// Temptation, reward, punishment, sucker and loner payoffs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    #[serde(rename = "T")]
    pub temptation: f64,
    #[serde(rename = "R")]
    pub reward: f64,
    #[serde(rename = "P")]
    pub punishment: f64,
    #[serde(rename = "S")]
    pub sucker: f64,
    #[serde(rename = "L")]
    pub loner: f64,
}

impl PayoffTable {
    /// Axelrod's T=5, R=3, P=1, S=0 with the given loner payoff.
    pub fn standard(loner: f64) -> Self {
        PayoffTable {
            temptation: 5.0,
            reward: 3.0,
            punishment: 1.0,
            sucker: 0.0,
            loner,
        }
    }

    pub fn with_loner(self, loner: f64) -> Self {
        PayoffTable { loner, ..self }
    }

    /// Checks `S < P < R < T` and `S < L < R`.
    pub fn validate(&self) -> Result<(), GameError> {
        let checks = [
            (self.sucker < self.punishment, Inequality::SLessThanP),
            (self.punishment < self.reward, Inequality::PLessThanR),
            (self.reward < self.temptation, Inequality::RLessThanT),
            (self.sucker < self.loner, Inequality::SLessThanL),
            (self.loner < self.reward, Inequality::LLessThanR),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some(&(_, inequality)) => Err(GameError::OrderingViolation(inequality)),
            None => Ok(()),
        }
    }

    /// Payoff to `focal` when it meets `opponent`.
    #[inline]
    pub fn focal_payoff(&self, focal: Strategy, opponent: Strategy) -> f64 {
        use Strategy::*;
        match (focal, opponent) {
            (Abstain, _) | (_, Abstain) => self.loner,
            (Cooperate, Cooperate) => self.reward,
            (Cooperate, Defect) => self.sucker,
            (Defect, Cooperate) => self.temptation,
            (Defect, Defect) => self.punishment,
        }
    }

    /// Row-major 3x3 focal payoff matrix indexed by [`Strategy::index`].
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for a in Strategy::ALL {
            for b in Strategy::ALL {
                m[a.index()][b.index()] = self.focal_payoff(a, b);
            }
        }
        m
    }
}

/// Payoffs of one game, seen from the focal player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionPayoff {
    pub focal: f64,
    pub opponent: f64,
}

pub fn validate_table(table: &PayoffTable) -> Result<(), GameError> {
    table.validate()
}

pub fn payoff_pair(s1: Strategy, s2: Strategy, table: &PayoffTable) -> InteractionPayoff {
    InteractionPayoff {
        focal: table.focal_payoff(s1, s2),
        opponent: table.focal_payoff(s2, s1),
    }
}

/// Strategy counts of a population or grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyCensus {
    pub n_c: usize,
    pub n_d: usize,
    pub n_a: usize,
}

impl StrategyCensus {
    pub fn new(n_c: usize, n_d: usize, n_a: usize) -> Self {
        StrategyCensus { n_c, n_d, n_a }
    }

    pub fn of<'a>(members: impl IntoIterator<Item = &'a Strategy>) -> Self {
        let mut census = StrategyCensus::default();
        for &s in members {
            *census.count_mut(s) += 1;
        }
        census
    }

    pub fn count(&self, s: Strategy) -> usize {
        match s {
            Strategy::Cooperate => self.n_c,
            Strategy::Defect => self.n_d,
            Strategy::Abstain => self.n_a,
        }
    }

    pub fn count_mut(&mut self, s: Strategy) -> &mut usize {
        match s {
            Strategy::Cooperate => &mut self.n_c,
            Strategy::Defect => &mut self.n_d,
            Strategy::Abstain => &mut self.n_a,
        }
    }

    pub fn total(&self) -> usize {
        self.n_c + self.n_d + self.n_a
    }

    /// The single strategy present, if the population is homogeneous.
    pub fn homogeneous(&self) -> Option<Strategy> {
        let total = self.total();
        Strategy::ALL.into_iter().find(|&s| total > 0 && self.count(s) == total)
    }

    /// The strategy with strictly more members than either other one.
    pub fn strict_plurality(&self) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|&s| {
            Strategy::ALL
                .iter()
                .all(|&o| o == s || self.count(s) > self.count(o))
        })
    }

    pub fn present(&self) -> usize {
        Strategy::ALL.iter().filter(|&&s| self.count(s) > 0).count()
    }
}
