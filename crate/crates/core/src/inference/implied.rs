//! Precision implied by a single log-odds equation.

use serde::Serialize;

use super::{interior_frequency, opposing_profile, utilities_at_observed};
use crate::error::{ensure, Error, Result};
use crate::focality::{focal_utilities, FocalSpec};
use crate::game::Game;
use crate::observed::ObservedPlay;
use crate::solver::logit_response;

fn indeterminate_gap(du: f64, scale: f64) -> bool {
    du.abs() <= 1e-12 * (1.0 + scale)
}

/// `ln(f_j / f_k) / (u*_j - u*_k)` with focal utilities at the observed opposing frequencies.
///
/// A negative value means no nonnegative precision reproduces the pair.
pub fn implied_lambda(
    game: &Game,
    obs: &ObservedPlay,
    player: usize,
    pair: (usize, usize),
    spec: &FocalSpec,
) -> Result<f64> {
    let (j, k) = pair;
    obs.check_shape(game)?;
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let n = game.num_strategies(player);
    ensure!(j < n && k < n && j != k, InvalidInput, "invalid strategy pair ({j}, {k})");
    let fj = interior_frequency(obs, player, j)?;
    let fk = interior_frequency(obs, player, k)?;
    let u = utilities_at_observed(game, spec, obs, player)?;
    let du = u[j] - u[k];
    ensure!(
        !indeterminate_gap(du, u[j].abs().max(u[k].abs())),
        Indeterminate,
        "strategies {j} and {k} of player {player} have equal utility; lambda is not identified"
    );
    Ok((fj / fk).ln() / du)
}

/// Range of implied precision over every completion of unreported opposing frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBounds {
    pub low: f64,
    pub high: f64,
    /// Number of extreme completions evaluated.
    pub completions: usize,
}

impl LambdaBounds {
    pub fn contains(&self, lambda: f64) -> bool {
        self.low <= lambda && lambda <= self.high
    }
}

/// Bounds of [`implied_lambda`] when opponents' frequencies are only partly reported.
///
/// The utility gap is affine in the unreported mass, so `ln(f_j/f_k) / gap` is monotone along
/// every segment where the gap keeps its sign and its extremes sit at the completions that put
/// all missing mass on a single strategy. A gap that vanishes or changes sign makes the
/// precision unbounded and is reported as [`Error::Indeterminate`].
pub fn implied_lambda_bounds(
    game: &Game,
    obs: &ObservedPlay,
    player: usize,
    pair: (usize, usize),
    spec: &FocalSpec,
) -> Result<LambdaBounds> {
    let (j, k) = pair;
    obs.check_shape(game)?;
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let n = game.num_strategies(player);
    ensure!(j < n && k < n && j != k, InvalidInput, "invalid strategy pair ({j}, {k})");
    let log_odds = (interior_frequency(obs, player, j)? / interior_frequency(obs, player, k)?).ln();

    let options: Vec<Vec<Vec<f64>>> = (0..game.num_players())
        .map(|q| {
            if q == player {
                vec![Vec::new()]
            } else {
                obs.extreme_completions(q)
            }
        })
        .collect();
    let mut choice = vec![0usize; options.len()];
    let mut lambdas = Vec::new();
    let mut sign = 0.0;
    loop {
        let profile = opposing_profile(game, obs, player, |q| Ok(options[q][choice[q]].clone()))?;
        let u = focal_utilities(game, spec, &profile, player)?;
        let du = u[j] - u[k];
        ensure!(
            !indeterminate_gap(du, u[j].abs().max(u[k].abs())),
            Indeterminate,
            "a completion of the unreported frequencies equalizes strategies {j} and {k}"
        );
        if sign == 0.0 {
            sign = du.signum();
        }
        ensure!(
            du.signum() == sign,
            Indeterminate,
            "the utility gap between strategies {j} and {k} changes sign over the unreported frequencies"
        );
        lambdas.push(log_odds / du);

        let mut q = 0;
        loop {
            if q == choice.len() {
                let low = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
                let high = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                return Ok(LambdaBounds {
                    low,
                    high,
                    completions: lambdas.len(),
                });
            }
            choice[q] += 1;
            if choice[q] < options[q].len() {
                break;
            }
            choice[q] = 0;
            q += 1;
        }
    }
}

/// Precision at which the logit probability of `strategy` equals its observed frequency,
/// when the player's remaining frequencies are unreported.
///
/// The probability is monotone in lambda only when the strategy has the unique highest or the
/// unique lowest focal utility; other cases are [`Error::Indeterminate`]. Negative results mean
/// the frequency lies on the wrong side of uniform play.
pub fn implied_lambda_marginal(
    game: &Game,
    obs: &ObservedPlay,
    player: usize,
    strategy: usize,
    spec: &FocalSpec,
) -> Result<f64> {
    obs.check_shape(game)?;
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let n = game.num_strategies(player);
    ensure!(strategy < n, InvalidInput, "strategy {strategy} out of range");
    ensure!(n >= 2, Domain, "player {player} has a single strategy");
    let target = interior_frequency(obs, player, strategy)?;
    let u = utilities_at_observed(game, spec, obs, player)?;
    let own = u[strategy];
    let others = u.iter().enumerate().filter(|&(t, _)| t != strategy).map(|(_, &x)| x);
    let direction = if others.clone().all(|x| x < own) {
        1.0
    } else if others.clone().all(|x| x > own) {
        -1.0
    } else {
        return Err(Error::Indeterminate(format!(
            "strategy {strategy} has neither the unique highest nor the unique lowest utility"
        )));
    };
    // Shifting by the mean keeps exp(lambda * u) finite over the whole bracket search.
    let mean = u.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = u.iter().map(|x| direction * (x - mean)).collect();
    let flipped: Vec<f64> = centered.iter().map(|x| -x).collect();
    // Negative precision is the positive precision on reversed utilities.
    let signed_prob = |lambda: f64| -> f64 {
        let (u, l) = if lambda >= 0.0 { (&centered, lambda) } else { (&flipped, -lambda) };
        logit_response(u, l).expect("finite utilities")[strategy]
    };
    let (mut lo, mut hi) = (0.0, 0.0);
    if signed_prob(0.0) < target {
        hi = 1.0;
        while signed_prob(hi) < target {
            lo = hi;
            hi *= 2.0;
            ensure!(hi < 1e12, Indeterminate, "no finite precision reaches frequency {target}");
        }
    } else {
        lo = -1.0;
        while signed_prob(lo) > target {
            hi = lo;
            lo *= 2.0;
            ensure!(lo > -1e12, Indeterminate, "no finite precision reaches frequency {target}");
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if signed_prob(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(direction * 0.5 * (lo + hi))
}
