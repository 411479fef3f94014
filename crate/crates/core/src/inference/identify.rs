//! Identifying focal strategies from observed frequencies.
//!
//! Under any focal logit equilibrium a strategy chosen more often than an alternative that
//! earns at least as much expected utility can only be explained by focality: the more frequent
//! strategy must be focal and the alternative must not be. [`identify_focal`] applies that rule
//! to every ordered pair. [`cross_player_focality_test`] compares log-odds across two players.

use serde::Serialize;

use super::{interior_frequency, utilities_at_observed};
use crate::config::CROSS_PLAYER_TOLERANCE;
use crate::error::{ensure, Result};
use crate::focality::FocalSpec;
use crate::game::Game;
use crate::observed::ObservedPlay;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConclusion {
    /// The first strategy is focal and the second is not.
    FirstFocalSecondNot,
    Uninformative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairClassification {
    pub player: usize,
    pub strategy: String,
    pub alternative: String,
    pub frequencies: (f64, f64),
    pub utilities: (f64, f64),
    pub conclusion: PairConclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerIdentification {
    pub player: usize,
    pub pairs: Vec<PairClassification>,
    /// Strategies shown to be focal by at least one pair.
    pub focal: Vec<String>,
    /// Strategies shown to be non-focal by at least one pair.
    pub non_focal: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identification {
    pub players: Vec<PlayerIdentification>,
    pub warnings: Vec<String>,
}

/// Classifies every ordered strategy pair of every player.
///
/// Utilities are expected utilities at the observed opposing frequencies. Pairs involving a
/// frequency of 0 or 1, or an unreported frequency, are skipped with a warning, as are players
/// whose opponents' frequencies are incomplete.
pub fn identify_focal(game: &Game, obs: &ObservedPlay) -> Result<Identification> {
    obs.check_shape(game)?;
    let plain = FocalSpec::none(game);
    let mut players = Vec::new();
    let mut warnings = Vec::new();
    for player in 0..game.num_players() {
        let labels = game.strategies(player);
        let u = match utilities_at_observed(game, &plain, obs, player) {
            Ok(u) => u,
            Err(e) => {
                warnings.push(format!("player {player} skipped: {e}"));
                continue;
            }
        };
        let mut pairs = Vec::new();
        let mut focal = Vec::new();
        let mut non_focal = Vec::new();
        for s in 0..labels.len() {
            for t in 0..labels.len() {
                if s == t {
                    continue;
                }
                let (fs, ft) = match (interior_frequency(obs, player, s), interior_frequency(obs, player, t)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => {
                        if s < t {
                            warnings.push(format!(
                                "player {player}: pair ({}, {}) skipped: {e}",
                                labels[s], labels[t]
                            ));
                        }
                        continue;
                    }
                };
                let conclusion = if fs > ft && u[s] <= u[t] {
                    if !focal.contains(&labels[s]) {
                        focal.push(labels[s].clone());
                    }
                    if !non_focal.contains(&labels[t]) {
                        non_focal.push(labels[t].clone());
                    }
                    PairConclusion::FirstFocalSecondNot
                } else {
                    PairConclusion::Uninformative
                };
                pairs.push(PairClassification {
                    player,
                    strategy: labels[s].clone(),
                    alternative: labels[t].clone(),
                    frequencies: (fs, ft),
                    utilities: (u[s], u[t]),
                    conclusion,
                });
            }
        }
        players.push(PlayerIdentification {
            player,
            pairs,
            focal,
            non_focal,
        });
    }
    Ok(Identification { players, warnings })
}

/// One player's strategy pair `(strategy, alternative)`, oriented so that `strategy` earns
/// strictly more expected utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StrategyPair {
    pub player: usize,
    pub strategy: usize,
    pub alternative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossPlayerVerdict {
    pub fired: bool,
    /// `ln(f(s_i)/f(s'_i)) * du_j - ln(f(s_j)/f(s'_j)) * du_i`; positive values favour firing.
    pub statistic: f64,
    pub log_odds: (f64, f64),
    pub utility_gaps: (f64, f64),
    /// Human-readable conclusion; empty unless the test fired.
    pub conclusion: String,
}

/// Compares log-odds ratios across two players whose pairs both favour the first strategy.
///
/// With positive utility gaps `du_i, du_j`, plain logit play gives
/// `ln(f(s_i)/f(s'_i)) / ln(f(s_j)/f(s'_j)) = du_i / du_j`. The test fires when the left side is
/// larger, compared in cross-multiplied form so the sign of the second log-odds cannot flip
/// the inequality, with relative slack `tolerance`. A firing test concludes that `s_i` is focal
/// and `s'_i` is not, or that `s_j` is non-focal and `s'_j` is focal.
pub fn cross_player_focality_test(
    game: &Game,
    obs: &ObservedPlay,
    first: StrategyPair,
    second: StrategyPair,
    tolerance: Option<f64>,
) -> Result<CrossPlayerVerdict> {
    obs.check_shape(game)?;
    ensure!(first.player != second.player, InvalidInput, "the two pairs must belong to different players");
    let tolerance = tolerance.unwrap_or(CROSS_PLAYER_TOLERANCE);
    let plain = FocalSpec::none(game);
    let mut gaps = [0.0; 2];
    let mut log_odds = [0.0; 2];
    for (k, pair) in [first, second].iter().enumerate() {
        ensure!(pair.player < game.num_players(), InvalidInput, "player {} out of range", pair.player);
        let n = game.num_strategies(pair.player);
        ensure!(
            pair.strategy < n && pair.alternative < n && pair.strategy != pair.alternative,
            InvalidInput,
            "invalid strategy pair for player {}",
            pair.player
        );
        let u = utilities_at_observed(game, &plain, obs, pair.player)?;
        gaps[k] = u[pair.strategy] - u[pair.alternative];
        ensure!(
            gaps[k] > 0.0,
            InvalidInput,
            "player {}: the first strategy must earn strictly more than the alternative (gap {})",
            pair.player,
            gaps[k]
        );
        log_odds[k] = (interior_frequency(obs, pair.player, pair.strategy)?
            / interior_frequency(obs, pair.player, pair.alternative)?)
        .ln();
    }
    let lhs = log_odds[0] * gaps[1];
    let rhs = log_odds[1] * gaps[0];
    let statistic = lhs - rhs;
    let fired = statistic > tolerance * (1.0 + lhs.abs().max(rhs.abs()));
    let conclusion = if fired {
        let name = |p: &StrategyPair, s: usize| game.strategies(p.player)[s].clone();
        format!(
            "{} focal and {} non-focal for player {}, or {} non-focal and {} focal for player {}",
            name(&first, first.strategy),
            name(&first, first.alternative),
            first.player,
            name(&second, second.strategy),
            name(&second, second.alternative),
            second.player
        )
    } else {
        String::new()
    };
    Ok(CrossPlayerVerdict {
        fired,
        statistic,
        log_odds: (log_odds[0], log_odds[1]),
        utility_gaps: (gaps[0], gaps[1]),
        conclusion,
    })
}
