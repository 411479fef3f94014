//! Focal sets and focality-adjusted utilities.
//!
//! A player's focal set receives an additive bias `delta` on top of expected utility. Focal sets
//! may be supplied directly or built from payoffs: the regret-averse set keeps strategies whose
//! worst-case ex-post regret is at most `beta` times the player's average worst-case regret, and
//! the Hurwicz set keeps strategies whose optimism-weighted max/min payoff blend is at least the
//! average blend.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::config::THRESHOLD_SLACK;
use crate::error::{ensure, Error, Result};
use crate::game::{expected_utilities_into, Game, MixedProfile, UtilityVector};

/// Per-player focal strategy sets and bias magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalSpec {
    sets: Vec<BTreeSet<usize>>,
    deltas: Vec<f64>,
}

impl FocalSpec {
    pub fn new(sets: Vec<BTreeSet<usize>>, deltas: Vec<f64>) -> Result<Self> {
        ensure!(
            sets.len() == deltas.len(),
            InvalidInput,
            "{} focal sets but {} deltas",
            sets.len(),
            deltas.len()
        );
        for (player, &d) in deltas.iter().enumerate() {
            ensure!(
                d.is_finite() && d >= 0.0,
                InvalidParameter,
                "delta of player {player} must be a nonnegative real, got {d}"
            );
        }
        Ok(Self { sets, deltas })
    }

    /// No focal strategies anywhere: plain logit behaviour.
    pub fn none(game: &Game) -> Self {
        let n = game.num_players();
        Self {
            sets: vec![BTreeSet::new(); n],
            deltas: vec![0.0; n],
        }
    }

    /// Focal sets given by strategy labels.
    pub fn from_labels<S: AsRef<str>>(game: &Game, labels: &[Vec<S>], deltas: Vec<f64>) -> Result<Self> {
        ensure!(
            labels.len() == game.num_players(),
            InvalidInput,
            "{} focal label lists for {} players",
            labels.len(),
            game.num_players()
        );
        let mut sets = Vec::with_capacity(labels.len());
        for (player, names) in labels.iter().enumerate() {
            let mut set = BTreeSet::new();
            for name in names {
                let name = name.as_ref();
                let index = game.strategy_index(player, name).ok_or_else(|| {
                    Error::InvalidInput(format!("player {player} has no strategy `{name}`"))
                })?;
                set.insert(index);
            }
            sets.push(set);
        }
        let spec = Self::new(sets, deltas)?;
        spec.check(game)?;
        Ok(spec)
    }

    /// Regret-averse focal sets for every player.
    pub fn regret_averse(game: &Game, beta: f64, deltas: Vec<f64>) -> Result<Self> {
        let sets = (0..game.num_players())
            .map(|i| regret_focal_set(game, i, beta))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sets, deltas)
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn set(&self, player: usize) -> &BTreeSet<usize> {
        &self.sets[player]
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn delta(&self, player: usize) -> f64 {
        self.deltas[player]
    }

    pub fn num_players(&self) -> usize {
        self.sets.len()
    }

    pub fn is_focal(&self, player: usize, strategy: usize) -> bool {
        self.sets[player].contains(&strategy)
    }

    pub fn with_deltas(&self, deltas: Vec<f64>) -> Result<Self> {
        Self::new(self.sets.clone(), deltas)
    }

    pub fn with_delta(&self, player: usize, delta: f64) -> Result<Self> {
        let mut deltas = self.deltas.clone();
        ensure!(player < deltas.len(), InvalidInput, "player {player} out of range");
        deltas[player] = delta;
        self.with_deltas(deltas)
    }

    pub fn with_set(&self, player: usize, set: BTreeSet<usize>) -> Result<Self> {
        ensure!(player < self.sets.len(), InvalidInput, "player {player} out of range");
        let mut sets = self.sets.clone();
        sets[player] = set;
        Self::new(sets, self.deltas.clone())
    }

    /// True when the bias cannot change player's behaviour: empty or full set, or zero delta.
    pub fn is_inert(&self, game: &Game, player: usize) -> bool {
        let set = &self.sets[player];
        self.deltas[player] == 0.0 || set.is_empty() || set.len() == game.num_strategies(player)
    }

    /// Same as [`FocalSpec::is_inert`] ignoring delta: the set does not separate strategies.
    pub fn set_is_trivial(&self, game: &Game, player: usize) -> bool {
        let set = &self.sets[player];
        set.is_empty() || set.len() == game.num_strategies(player)
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        ensure!(
            self.sets.len() == game.num_players(),
            InvalidInput,
            "focal spec covers {} players, game has {}",
            self.sets.len(),
            game.num_players()
        );
        for (player, set) in self.sets.iter().enumerate() {
            if let Some(&max) = set.iter().next_back() {
                ensure!(
                    max < game.num_strategies(player),
                    InvalidInput,
                    "focal strategy {max} out of range for player {player}"
                );
            }
        }
        Ok(())
    }

    /// Focal sets rendered as strategy labels.
    pub fn labels(&self, game: &Game) -> Vec<Vec<String>> {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, set)| set.iter().map(|&j| game.strategies(i)[j].clone()).collect())
            .collect()
    }
}

/// Expected utilities plus `delta_i` on exactly the focal strategies of `player`.
pub fn focal_utilities(
    game: &Game,
    spec: &FocalSpec,
    profile: &MixedProfile,
    player: usize,
) -> Result<UtilityVector> {
    spec.check(game)?;
    let mut out = crate::game::expected_utilities(game, profile, player)?;
    add_bias(spec, player, &mut out);
    Ok(out)
}

pub(crate) fn focal_utilities_into(
    game: &Game,
    spec: &FocalSpec,
    profile: &MixedProfile,
    player: usize,
    out: &mut [f64],
) {
    expected_utilities_into(game, profile, player, out);
    add_bias(spec, player, out);
}

fn add_bias(spec: &FocalSpec, player: usize, utilities: &mut [f64]) {
    let delta = spec.deltas[player];
    if delta != 0.0 {
        for &j in &spec.sets[player] {
            utilities[j] += delta;
        }
    }
}

/// Worst-case ex-post regret of every strategy of one player, and their average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretProfile {
    pub regrets: Vec<f64>,
    pub mean: f64,
}

/// Maximum regret `R_i(s)` for every strategy of `player`.
pub fn regret_profile(game: &Game, player: usize) -> Result<RegretProfile> {
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let j = game.num_strategies(player);
    ensure!(
        j >= 2,
        Domain,
        "player {player} has a single strategy; regret against alternatives is undefined"
    );
    let mut regrets = vec![f64::NEG_INFINITY; j];
    game.for_each_opposing_profile(player, |_, column| {
        // Best and second-best payoff in this column; the best strategy regrets only the runner-up.
        let (mut best, mut best_at) = (f64::NEG_INFINITY, 0);
        for (s, &u) in column.iter().enumerate() {
            if u > best {
                best = u;
                best_at = s;
            }
        }
        let runner_up = column
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != best_at)
            .map(|(_, &u)| u)
            .fold(f64::NEG_INFINITY, f64::max);
        for (s, &u) in column.iter().enumerate() {
            let alternative = if s == best_at { runner_up } else { best };
            regrets[s] = regrets[s].max(alternative - u);
        }
    });
    let mean = regrets.iter().sum::<f64>() / j as f64;
    Ok(RegretProfile { regrets, mean })
}

pub fn max_regret(game: &Game, player: usize, strategy: usize) -> Result<f64> {
    let profile = regret_profile(game, player)?;
    profile
        .regrets
        .get(strategy)
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("strategy {strategy} out of range")))
}

fn within_threshold(value: f64, threshold: f64) -> bool {
    value <= threshold + THRESHOLD_SLACK * (1.0 + threshold.abs())
}

/// Strategies with `R_i(s) <= beta * mean_s R_i(s)`; ties count as focal.
pub fn regret_focal_set(game: &Game, player: usize, beta: f64) -> Result<BTreeSet<usize>> {
    ensure!(
        beta > 0.0 && beta <= 1.0,
        InvalidParameter,
        "beta must lie in (0, 1], got {beta}"
    );
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    if game.num_strategies(player) == 1 {
        return Ok(BTreeSet::from([0]));
    }
    let profile = regret_profile(game, player)?;
    let threshold = beta * profile.mean;
    Ok(profile
        .regrets
        .iter()
        .enumerate()
        .filter(|&(_, &r)| within_threshold(r, threshold))
        .map(|(s, _)| s)
        .collect())
}

/// Hurwicz value `alpha * max + (1 - alpha) * min` of each strategy over opposing profiles.
pub fn hurwicz_values(game: &Game, player: usize, alpha: f64) -> Result<Vec<f64>> {
    ensure!(
        (0.0..=1.0).contains(&alpha),
        InvalidParameter,
        "alpha must lie in [0, 1], got {alpha}"
    );
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let j = game.num_strategies(player);
    let mut highs = vec![f64::NEG_INFINITY; j];
    let mut lows = vec![f64::INFINITY; j];
    game.for_each_opposing_profile(player, |_, column| {
        for (s, &u) in column.iter().enumerate() {
            highs[s] = highs[s].max(u);
            lows[s] = lows[s].min(u);
        }
    });
    Ok(highs
        .iter()
        .zip(&lows)
        .map(|(&hi, &lo)| alpha * hi + (1.0 - alpha) * lo)
        .collect())
}

/// Strategies whose Hurwicz value is at least the player's average Hurwicz value.
pub fn hurwicz_focal_set(game: &Game, player: usize, alpha: f64) -> Result<BTreeSet<usize>> {
    let values = hurwicz_values(game, player, alpha)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(values
        .iter()
        .enumerate()
        .filter(|&(_, &h)| within_threshold(-h, -mean))
        .map(|(s, _)| s)
        .collect())
}

/// Which sufficient conditions for regret-averse focality fire for one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyObservations {
    pub strategy: usize,
    pub label: String,
    pub max_regret: Option<f64>,
    /// Membership in the regret-averse focal set with `beta = 1`.
    pub focal: bool,
    /// Weakly dominant: at least as good as every alternative against every opposing profile.
    pub weakly_dominant: bool,
    /// Weakly dominates some strategy that is itself focal.
    pub dominates_focal: bool,
    /// Owns the game's highest payoff and that payoff is at least `2 * runner_up - lowest`.
    pub highest_payoff: bool,
    /// Owns the game's lowest payoff and it is below `2 * second_lowest - highest`; flags exclusion.
    pub lowest_payoff_excluded: bool,
    /// Worst payoff at least half the highest payoff plus half the others' average worst payoff.
    pub secure_minimum: bool,
    /// Against every opposing profile, at least the average of the game maximum and the alternatives.
    pub pointwise_high: bool,
    /// 2x2 games only: payoff sum at least the alternative's (exact focal-set criterion).
    pub average_payoff: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservationReport {
    pub player: usize,
    pub average_payoff_applicable: bool,
    pub strategies: Vec<StrategyObservations>,
}

/// Evaluates the sufficient conditions for focality (dominance, extreme payoffs, secure payoffs)
/// and, for 2x2 games, the payoff-sum characterisation, for every strategy of `player`.
pub fn observation_checks(game: &Game, player: usize) -> Result<ObservationReport> {
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let j = game.num_strategies(player);
    let labels = game.strategies(player);

    let mut columns: Vec<Vec<f64>> = Vec::new();
    game.for_each_opposing_profile(player, |_, column| columns.push(column.to_vec()));

    let multi = j >= 2;
    let regrets = if multi {
        Some(regret_profile(game, player)?)
    } else {
        None
    };
    let focal = regret_focal_set(game, player, 1.0)?;

    // Extreme payoffs over the whole game, first occurrence in row-major profile order.
    let mut own = Vec::with_capacity(game.num_profiles());
    let mut own_strategy = Vec::with_capacity(game.num_profiles());
    game.for_each_profile(|s, cell| {
        own.push(cell[player]);
        own_strategy.push(s[player]);
    });
    let argmax = first_index_by(&own, |a, b| a > b);
    let argmin = first_index_by(&own, |a, b| a < b);
    let top = own[argmax];
    let bottom = own[argmin];
    let others_max = fold_except(&own, argmax, f64::NEG_INFINITY, f64::max);
    let others_min = fold_except(&own, argmin, f64::INFINITY, f64::min);
    let has_runner_up = own.len() >= 2;

    let mins: Vec<f64> = (0..j)
        .map(|s| columns.iter().map(|c| c[s]).fold(f64::INFINITY, f64::min))
        .collect();

    let two_by_two = game.num_players() == 2 && game.strategy_counts() == [2, 2];

    let dominates = |a: usize, b: usize| {
        columns.iter().all(|c| c[a] >= c[b]) && columns.iter().any(|c| c[a] > c[b])
    };

    let strategies = (0..j)
        .map(|s| {
            let weakly_dominant = (0..j).all(|t| columns.iter().all(|c| c[s] >= c[t]));
            let dominates_focal = (0..j).any(|t| t != s && focal.contains(&t) && dominates(s, t));
            let highest_payoff = has_runner_up
                && own_strategy[argmax] == s
                && top >= 2.0 * others_max - bottom;
            let lowest_payoff_excluded = has_runner_up
                && own_strategy[argmin] == s
                && bottom < 2.0 * others_min - top;
            let (secure_minimum, pointwise_high) = if multi {
                let jf = j as f64;
                let others_min_sum: f64 = (0..j).filter(|&t| t != s).map(|t| mins[t]).sum();
                let secure = 2.0 * (jf - 1.0) * mins[s] >= (jf - 1.0) * top + others_min_sum;
                let pointwise = columns.iter().all(|c| {
                    let rest: f64 = (0..j).filter(|&t| t != s).map(|t| c[t]).sum();
                    jf * c[s] >= top + rest
                });
                (secure, pointwise)
            } else {
                (false, false)
            };
            let average_payoff = two_by_two.then(|| {
                let t = 1 - s;
                let own_sum: f64 = columns.iter().map(|c| c[s]).sum();
                let alt_sum: f64 = columns.iter().map(|c| c[t]).sum();
                own_sum >= alt_sum
            });
            StrategyObservations {
                strategy: s,
                label: labels[s].clone(),
                max_regret: regrets.as_ref().map(|r| r.regrets[s]),
                focal: focal.contains(&s),
                weakly_dominant,
                dominates_focal,
                highest_payoff,
                lowest_payoff_excluded,
                secure_minimum,
                pointwise_high,
                average_payoff,
            }
        })
        .collect();

    Ok(ObservationReport {
        player,
        average_payoff_applicable: two_by_two,
        strategies,
    })
}

fn first_index_by(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

fn fold_except(values: &[f64], skip: usize, init: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .fold(init, |acc, (_, &v)| f(acc, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bimatrix(rows: &[&str], cols: &[&str], cells: &[&[(f64, f64)]]) -> Game {
        Game::bimatrix("t", rows, cols, cells).unwrap()
    }

    fn gamma2() -> Game {
        bimatrix(
            &["U", "D"],
            &["L", "R"],
            &[&[(32.0, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
        )
    }

    fn kreps() -> Game {
        bimatrix(
            &["U", "D"],
            &["Left", "Middle", "Non-Nash", "Right"],
            &[
                &[(20.0, 5.0), (0.0, 4.5), (1.0, 3.0), (2.0, -25.0)],
                &[(0.0, -25.0), (1.0, -10.0), (3.0, 3.0), (5.0, 4.0)],
            ],
        )
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn zero_delta_leaves_expected_utilities() {
        let game = gamma2();
        let spec = FocalSpec::new(vec![set(&[0]), set(&[1])], vec![0.0, 0.0]).unwrap();
        let p = MixedProfile::new(vec![vec![0.3, 0.7], vec![0.16, 0.84]]).unwrap();
        for i in 0..2 {
            assert_eq!(
                focal_utilities(&game, &spec, &p, i).unwrap(),
                crate::game::expected_utilities(&game, &p, i).unwrap()
            );
        }
    }

    #[test]
    fn bias_lands_on_focal_strategies_only() {
        let game = gamma2();
        let spec = FocalSpec::from_labels(&game, &[vec!["U"], vec![]], vec![1.94, 0.0]).unwrap();
        let p = MixedProfile::new(vec![vec![0.5, 0.5], vec![0.16, 0.84]]).unwrap();
        let u = focal_utilities(&game, &spec, &p, 0).unwrap();
        assert_abs_diff_eq!(u[0], 10.42, epsilon = 1e-12);
        assert_abs_diff_eq!(u[1], 7.36, epsilon = 1e-12);
    }

    #[test]
    fn full_focal_set_shifts_uniformly() {
        let game = gamma2();
        let spec = FocalSpec::from_labels(&game, &[vec!["U", "D"], vec![]], vec![3.0, 0.0]).unwrap();
        let p = MixedProfile::new(vec![vec![0.5, 0.5], vec![0.16, 0.84]]).unwrap();
        let u = focal_utilities(&game, &spec, &p, 0).unwrap();
        assert_abs_diff_eq!(u[0], 11.48, epsilon = 1e-12);
        assert_abs_diff_eq!(u[1], 10.36, epsilon = 1e-12);
        assert!(spec.is_inert(&game, 0));
    }

    #[test]
    fn spec_rejects_bad_inputs() {
        let game = gamma2();
        assert!(FocalSpec::new(vec![set(&[0])], vec![-1.0]).is_err());
        assert!(FocalSpec::new(vec![set(&[0])], vec![0.0, 0.0]).is_err());
        assert!(FocalSpec::from_labels(&game, &[vec!["X"], vec![]], vec![0.0, 0.0]).is_err());
        let out_of_range = FocalSpec::new(vec![set(&[5]), set(&[])], vec![1.0, 0.0]).unwrap();
        let p = MixedProfile::uniform(&game);
        assert!(focal_utilities(&game, &out_of_range, &p, 0).is_err());
    }

    #[test]
    fn kreps_column_regrets() {
        let r = regret_profile(&kreps(), 1).unwrap();
        assert_eq!(r.regrets, vec![29.0, 14.0, 2.0, 30.0]);
        assert_abs_diff_eq!(r.mean, 18.75);
        assert_eq!(regret_focal_set(&kreps(), 1, 1.0).unwrap(), set(&[1, 2]));
        assert_eq!(max_regret(&kreps(), 0, 0).unwrap(), 3.0);
        assert_eq!(max_regret(&kreps(), 0, 1).unwrap(), 20.0);
    }

    #[test]
    fn coordination_column_regrets() {
        // The outside option earns 4 for sure, so its worst regret is 18 - 4 against D.
        let game = bimatrix(
            &["U", "D"],
            &["Left", "Right", "Safe"],
            &[
                &[(9.0, 9.0), (0.0, 0.0), (0.0, 4.0)],
                &[(0.0, 0.0), (18.0, 18.0), (0.0, 4.0)],
            ],
        );
        let r = regret_profile(&game, 1).unwrap();
        assert_eq!(r.regrets, vec![18.0, 9.0, 14.0]);
        assert_eq!(regret_focal_set(&game, 1, 1.0).unwrap(), set(&[1]));
    }

    #[test]
    fn single_strategy_player() {
        let game = bimatrix(&["only"], &["L", "R"], &[&[(1.0, 0.0), (2.0, 1.0)]]);
        assert!(matches!(max_regret(&game, 0, 0), Err(Error::Domain(_))));
        assert_eq!(regret_focal_set(&game, 0, 1.0).unwrap(), set(&[0]));
        assert_eq!(hurwicz_focal_set(&game, 0, 0.5).unwrap(), set(&[0]));
    }

    #[test]
    fn regret_sets_of_matching_pennies() {
        let sym = bimatrix(
            &["U", "D"],
            &["L", "R"],
            &[&[(8.0, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
        );
        assert_eq!(regret_focal_set(&sym, 0, 1.0).unwrap(), set(&[0, 1]));
        assert_eq!(regret_focal_set(&sym, 1, 1.0).unwrap(), set(&[0, 1]));
        assert_eq!(regret_focal_set(&gamma2(), 0, 1.0).unwrap(), set(&[0]));
    }

    #[test]
    fn beta_out_of_range() {
        assert!(matches!(
            regret_focal_set(&gamma2(), 0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(regret_focal_set(&gamma2(), 0, 1.5).is_err());
        assert!(hurwicz_focal_set(&gamma2(), 0, -0.1).is_err());
    }

    #[test]
    fn strict_beta_drops_middle_in_kreps() {
        assert_eq!(regret_focal_set(&kreps(), 1, 0.5).unwrap(), set(&[2]));
    }

    #[test]
    fn hurwicz_sets() {
        assert_eq!(hurwicz_values(&gamma2(), 0, 1.0).unwrap(), vec![32.0, 8.0]);
        assert_eq!(hurwicz_focal_set(&gamma2(), 0, 1.0).unwrap(), set(&[0]));
        // Pure pessimism: worst payoffs are 4 and 4.
        assert_eq!(hurwicz_focal_set(&gamma2(), 0, 0.0).unwrap(), set(&[0, 1]));
        let flat = bimatrix(&["a", "b"], &["x", "y"], &[&[(3.0, 0.0), (3.0, 0.0)], &[(3.0, 0.0), (3.0, 0.0)]]);
        assert_eq!(hurwicz_focal_set(&flat, 0, 0.3).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn observations_on_asymmetric_pennies() {
        let report = observation_checks(&gamma2(), 0).unwrap();
        assert!(report.average_payoff_applicable);
        let u = &report.strategies[0];
        assert!(u.highest_payoff);
        assert!(u.focal);
        assert_eq!(u.average_payoff, Some(true));
        assert_eq!(report.strategies[1].average_payoff, Some(false));
    }

    #[test]
    fn observations_on_m1() {
        let m1 = bimatrix(
            &["U", "D"],
            &["L", "R"],
            &[&[(4.0, 4.0), (4.0, 4.0)], &[(0.0, 1.0), (6.0, 3.0)]],
        );
        let col = observation_checks(&m1, 1).unwrap();
        assert!(col.strategies[1].weakly_dominant);
        assert!(!col.strategies[0].weakly_dominant);
        assert_eq!(col.strategies[1].average_payoff, Some(true));
        let row = observation_checks(&m1, 0).unwrap();
        assert_eq!(row.strategies[0].average_payoff, Some(true));
        assert_eq!(row.strategies[1].average_payoff, Some(false));
    }

    #[test]
    fn average_payoff_not_applicable_beyond_two_by_two() {
        let report = observation_checks(&kreps(), 1).unwrap();
        assert!(!report.average_payoff_applicable);
        assert!(report.strategies.iter().all(|s| s.average_payoff.is_none()));
    }
}
