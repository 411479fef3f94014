//! Inference from observed play: implied precision, calibration of `(lambda, delta)`,
//! identification of focal strategies, falsification patterns and maximum likelihood.
//!
//! Under a focal logit equilibrium every pair of strategies `j, k` of player `i` satisfies
//! `ln(f_j / f_k) = lambda * (u_j - u_k) + lambda * delta_i * (1[j in F_i] - 1[k in F_i])`,
//! with utilities evaluated at the opponents' equilibrium play. All routines here evaluate
//! utilities at the observed opposing frequencies and work from these log-odds equations.

pub mod calibrate;
pub mod falsify;
pub mod identify;
pub mod implied;
pub mod mle;

pub use calibrate::{calibrate, evaluate_parameters, CalibrateOptions, CalibrationResult, DeltaPolicy};
pub use falsify::{reject_focal_qre_quad, reject_qre_pair, RejectionVerdict};
pub use identify::{cross_player_focality_test, identify_focal, CrossPlayerVerdict, Identification, StrategyPair};
pub use implied::{implied_lambda, implied_lambda_bounds, implied_lambda_marginal};
pub use mle::{mle_fit, simulate_counts, MleData, MleEstimate, MleOptions};

use crate::error::{ensure, Error, Result};
use crate::focality::{focal_utilities, FocalSpec};
use crate::game::{Game, MixedProfile};
use crate::observed::ObservedPlay;

/// Focal utilities of `player` at the observed frequencies of the other players.
/// The player's own frequencies are not used and may be missing.
pub(crate) fn utilities_at_observed(
    game: &Game,
    spec: &FocalSpec,
    obs: &ObservedPlay,
    player: usize,
) -> Result<Vec<f64>> {
    let profile = opposing_profile(game, obs, player, |k| {
        obs.player(k).ok_or_else(|| {
            Error::MissingData(format!(
                "frequencies of player {k} are incomplete; utilities of player {player} need them"
            ))
        })
    })?;
    focal_utilities(game, spec, &profile, player)
}

/// A profile whose opponents of `player` come from `opponent`, with the player uniform.
pub(crate) fn opposing_profile(
    game: &Game,
    obs: &ObservedPlay,
    player: usize,
    mut opponent: impl FnMut(usize) -> Result<Vec<f64>>,
) -> Result<MixedProfile> {
    obs.check_shape(game)?;
    ensure!(player < game.num_players(), InvalidInput, "player {player} out of range");
    let vectors = (0..game.num_players())
        .map(|k| {
            if k == player {
                let j = game.num_strategies(k);
                Ok(vec![1.0 / j as f64; j])
            } else {
                opponent(k)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MixedProfile::new(vectors)
}

/// An interior reported frequency, or a boundary / missing-data error.
pub(crate) fn interior_frequency(obs: &ObservedPlay, player: usize, strategy: usize) -> Result<f64> {
    let f = obs.require(player, strategy)?;
    ensure!(
        f > 0.0 && f < 1.0,
        Boundary,
        "frequency {f} of player {player}, strategy {strategy} is not in (0, 1)"
    );
    Ok(f)
}
