//! Non-spatial population: game fitness plus generational tournament
//! selection.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{Dynamics, Fnv1a, StopReason, TerminalState, Trajectory};
use crate::error::{Error, Result};
use crate::game::{PayoffTable, Strategy, StrategyCensus};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Population {
    pub members: Vec<Strategy>,
}

impl Population {
    pub fn new(members: Vec<Strategy>) -> Self {
        Population { members }
    }

    /// Members grouped by strategy in C, D, A order.
    pub fn from_census(census: StrategyCensus) -> Self {
        let mut members = Vec::with_capacity(census.total());
        for s in Strategy::ALL {
            members.extend(std::iter::repeat(s).take(census.count(s)));
        }
        Population { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn census(&self) -> StrategyCensus {
        StrategyCensus::of(&self.members)
    }

    /// Order-independent: hashes the census only.
    pub fn state_hash(&self) -> u64 {
        census_hash(&self.census())
    }
}

pub fn census_hash(census: &StrategyCensus) -> u64 {
    let mut h = Fnv1a::new();
    h.write_u64(census.n_c as u64);
    h.write_u64(census.n_d as u64);
    h.write_u64(census.n_a as u64);
    h.finish()
}

pub type FitnessVector = Vec<f64>;

fn check_size(pop: &Population) -> Result<()> {
    if pop.len() < 2 {
        return Err(Error::PopulationTooSmall(pop.len()));
    }
    Ok(())
}

/// Every member plays every other member once; no self-play.
///
/// Computed per strategy from the census, so the cost is linear in `N`.
pub fn evaluate_roundrobin(pop: &Population, table: &PayoffTable) -> Result<FitnessVector> {
    check_size(pop)?;
    let census = pop.census();
    let m = table.matrix();
    let per_strategy = Strategy::ALL.map(|s| {
        let row = &m[s.index()];
        Strategy::ALL
            .iter()
            .map(|&o| {
                let opponents = census.count(o).saturating_sub(usize::from(o == s));
                opponents as f64 * row[o.index()]
            })
            .sum::<f64>()
    });
    Ok(pop.members.iter().map(|s| per_strategy[s.index()]).collect())
}

/// Each member starts `games_per_agent` games against distinct opponents
/// drawn uniformly. Both players of every game bank their payoff.
pub fn evaluate_sampled<R: Rng + ?Sized>(
    pop: &Population,
    table: &PayoffTable,
    games_per_agent: usize,
    rng: &mut R,
) -> Result<FitnessVector> {
    check_size(pop)?;
    let n = pop.len();
    if games_per_agent == 0 || games_per_agent > n - 1 {
        return Err(Error::validation(
            "games_per_agent",
            format!("must be in 1..={} for a population of {n}", n - 1),
        ));
    }
    let mut fitness = vec![0.0; n];
    for i in 0..n {
        for k in index::sample(rng, n - 1, games_per_agent).into_iter() {
            let j = if k >= i { k + 1 } else { k };
            let (a, b) = (pop.members[i], pop.members[j]);
            fitness[i] += table.focal_payoff(a, b);
            fitness[j] += table.focal_payoff(b, a);
        }
    }
    Ok(fitness)
}

/// Closed form of the cooperator-minus-abstainer fitness gap in a
/// defector-free population: `(n_C - 1)(R - L)`.
pub fn analytic_gap_ca(census: &StrategyCensus, table: &PayoffTable) -> Result<f64> {
    if census.n_d != 0 {
        return Err(Error::WrongComposition("defectors present"));
    }
    Ok(census.n_c.saturating_sub(1) as f64 * (table.reward - table.loner))
}

/// Closed form of the defector-minus-abstainer fitness gap in a
/// cooperator-free population: `(n_D - 1)(P - L)`. Positive favours
/// defectors.
pub fn analytic_gap_da(census: &StrategyCensus, table: &PayoffTable) -> Result<f64> {
    if census.n_c != 0 {
        return Err(Error::WrongComposition("cooperators present"));
    }
    Ok(census.n_d.saturating_sub(1) as f64 * (table.punishment - table.loner))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TournamentParams {
    pub size: usize,
    pub with_replacement: bool,
}

impl Default for TournamentParams {
    fn default() -> Self {
        TournamentParams {
            size: 2,
            with_replacement: false,
        }
    }
}

/// Builds the next generation from `N` independent tournaments. Each copies
/// the fittest entrant's strategy, with ties drawn uniformly.
pub fn tournament_step<R: Rng + ?Sized>(
    pop: &Population,
    fitness: &[f64],
    rng: &mut R,
    params: TournamentParams,
) -> Result<Population> {
    let n = pop.len();
    if fitness.len() != n {
        return Err(Error::validation(
            "fitness",
            format!("{} entries for {n} members", fitness.len()),
        ));
    }
    if params.size == 0 || (!params.with_replacement && params.size > n) {
        return Err(Error::validation(
            "tournament.size",
            format!("{} entrants cannot be drawn from {n} members", params.size),
        ));
    }
    let mut entrants = Vec::with_capacity(params.size);
    let mut best = Vec::with_capacity(params.size);
    let members = (0..n)
        .map(|_| {
            entrants.clear();
            if params.with_replacement {
                entrants.extend((0..params.size).map(|_| rng.gen_range(0..n)));
            } else {
                entrants.extend(index::sample(rng, n, params.size).into_iter());
            }
            let top = entrants
                .iter()
                .map(|&i| fitness[i])
                .fold(f64::NEG_INFINITY, f64::max);
            best.clear();
            best.extend(entrants.iter().copied().filter(|&i| fitness[i] == top));
            let winner = if best.len() == 1 {
                best[0]
            } else {
                best[rng.gen_range(0..best.len())]
            };
            pop.members[winner]
        })
        .collect();
    Ok(Population { members })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InteractionMode {
    #[default]
    RoundRobin,
    Sampled {
        games_per_agent: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WellMixedParams {
    pub max_generations: usize,
    pub mode: InteractionMode,
    pub tournament: TournamentParams,
}

impl Default for WellMixedParams {
    fn default() -> Self {
        WellMixedParams {
            max_generations: 1000,
            mode: InteractionMode::RoundRobin,
            tournament: TournamentParams::default(),
        }
    }
}

pub fn evaluate<R: Rng + ?Sized>(
    pop: &Population,
    table: &PayoffTable,
    mode: InteractionMode,
    rng: &mut R,
) -> Result<FitnessVector> {
    match mode {
        InteractionMode::RoundRobin => evaluate_roundrobin(pop, table),
        InteractionMode::Sampled { games_per_agent } => evaluate_sampled(pop, table, games_per_agent, rng),
    }
}

/// Evaluate-then-select until one strategy remains or the generation cap.
pub fn run_wellmixed<R: Rng + ?Sized>(
    initial: Population,
    table: &PayoffTable,
    params: &WellMixedParams,
    rng: &mut R,
) -> Result<Trajectory> {
    table.validate()?;
    check_size(&initial)?;
    let mut traj = Trajectory::new(Dynamics::Stochastic);
    let mut pop = initial;
    traj.record(pop.census(), pop.state_hash());
    let mut generation = 0;
    let stop = loop {
        if pop.census().homogeneous().is_some() {
            traj.successor_hash = traj.hashes.last().copied();
            break StopReason::Homogeneous;
        }
        if generation >= params.max_generations {
            break StopReason::GenerationCap;
        }
        let fitness = evaluate(&pop, table, params.mode, rng)?;
        pop = tournament_step(&pop, &fitness, rng, params.tournament)?;
        generation += 1;
        traj.record(pop.census(), pop.state_hash());
    };
    traj.stop = stop;
    traj.terminal = TerminalState::Population(pop);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn pop(c: usize, d: usize, a: usize) -> Population {
        Population::from_census(StrategyCensus::new(c, d, a))
    }

    #[test]
    fn two_cooperators() {
        let f = evaluate_roundrobin(&pop(2, 0, 0), &PayoffTable::standard(1.5)).unwrap();
        assert_eq!(f, vec![3.0, 3.0]);
    }

    #[test]
    fn half_cooperators_half_abstainers() {
        let f = evaluate_roundrobin(&pop(50, 0, 50), &PayoffTable::standard(1.0)).unwrap();
        assert!(f[..50].iter().all(|&x| x == 197.0));
        assert!(f[50..].iter().all(|&x| x == 99.0));
    }

    #[test]
    fn defector_and_two_abstainers() {
        let f = evaluate_roundrobin(&pop(0, 1, 2), &PayoffTable::standard(1.0)).unwrap();
        assert_eq!(f, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn too_small() {
        let t = PayoffTable::standard(1.0);
        assert!(matches!(
            evaluate_roundrobin(&pop(1, 0, 0), &t),
            Err(Error::PopulationTooSmall(1))
        ));
        assert!(matches!(
            evaluate_sampled(&pop(0, 0, 1), &t, 1, &mut stream(1)),
            Err(Error::PopulationTooSmall(1))
        ));
    }

    #[test]
    fn analytic_gap_examples() {
        let t = |l| PayoffTable::standard(l);
        assert_eq!(analytic_gap_ca(&StrategyCensus::new(50, 0, 50), &t(1.0)).unwrap(), 98.0);
        assert_eq!(analytic_gap_ca(&StrategyCensus::new(1, 0, 99), &t(2.2)).unwrap(), 0.0);
        assert!((analytic_gap_ca(&StrategyCensus::new(10, 0, 0), &t(2.9)).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(analytic_gap_da(&StrategyCensus::new(0, 50, 50), &t(1.0)).unwrap(), 0.0);
        assert!((analytic_gap_da(&StrategyCensus::new(0, 50, 50), &t(0.9)).unwrap() - 4.9).abs() < 1e-12);
        assert_eq!(analytic_gap_da(&StrategyCensus::new(0, 1, 99), &t(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn analytic_gap_rejects_wrong_mix() {
        let t = PayoffTable::standard(1.0);
        assert!(matches!(
            analytic_gap_ca(&StrategyCensus::new(1, 1, 1), &t),
            Err(Error::WrongComposition(_))
        ));
        assert!(matches!(
            analytic_gap_da(&StrategyCensus::new(1, 1, 1), &t),
            Err(Error::WrongComposition(_))
        ));
    }

    #[test]
    fn saturated_sampling_doubles_round_robin() {
        // Every pair is met twice: once from each side.
        let t = PayoffTable::standard(1.3);
        let p = pop(7, 5, 9);
        let rr = evaluate_roundrobin(&p, &t).unwrap();
        let s = evaluate_sampled(&p, &t, p.len() - 1, &mut stream(3)).unwrap();
        for (a, b) in rr.iter().zip(&s) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_abstainers_bank_loner_payoff() {
        let t = PayoffTable::standard(1.5);
        let p = pop(0, 0, 100);
        let k = 10;
        let f = evaluate_sampled(&p, &t, k, &mut stream(11)).unwrap();
        // k games as initiator, the rest as drawn opponent.
        assert!(f.iter().all(|&x| x >= k as f64 * 1.5 && (x / 1.5).fract() == 0.0));
        let total: f64 = f.iter().sum();
        assert_eq!(total, 2.0 * k as f64 * 1.5 * 100.0);
    }

    #[test]
    fn sampled_rejects_too_many_games() {
        let t = PayoffTable::standard(1.5);
        assert!(evaluate_sampled(&pop(1, 1, 1), &t, 3, &mut stream(0)).is_err());
    }

    #[test]
    fn homogeneous_tournament_is_closed() {
        let p = pop(0, 0, 30);
        let f = vec![1.0; 30];
        let next = tournament_step(&p, &f, &mut stream(5), TournamentParams::default()).unwrap();
        assert_eq!(next, p);
    }

    #[test]
    fn tournament_with_replacement_keeps_size() {
        let p = pop(3, 4, 5);
        let f = evaluate_roundrobin(&p, &PayoffTable::standard(1.2)).unwrap();
        let params = TournamentParams {
            size: 3,
            with_replacement: true,
        };
        let next = tournament_step(&p, &f, &mut stream(5), params).unwrap();
        assert_eq!(next.len(), 12);
    }

    #[test]
    fn all_abstainers_stop_immediately() {
        let t = PayoffTable::standard(1.5);
        let traj = run_wellmixed(pop(0, 0, 100), &t, &WellMixedParams::default(), &mut stream(1)).unwrap();
        assert_eq!(traj.generations(), 1);
        assert_eq!(traj.stop, StopReason::Homogeneous);
    }

    #[test]
    fn run_is_deterministic() {
        let t = PayoffTable::standard(1.0);
        let a = run_wellmixed(pop(0, 50, 50), &t, &WellMixedParams::default(), &mut stream(9)).unwrap();
        let b = run_wellmixed(pop(0, 50, 50), &t, &WellMixedParams::default(), &mut stream(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.terminal_census().homogeneous().is_some() || a.stop == StopReason::GenerationCap);
    }
}
