mod common;

use std::collections::BTreeSet;

use common::{real_bimatrix, small_game};
use fqre::dataset::fixture;
use fqre::inference::mle::log_likelihood_at;
use fqre::inference::{
    calibrate, cross_player_focality_test, identify_focal, implied_lambda, mle_fit, reject_focal_qre_quad,
    reject_qre_pair, simulate_counts, CalibrateOptions, DeltaPolicy, MleData, MleOptions, StrategyPair,
};
use fqre::solver::{solve, solve_robust};
use fqre::{FocalSpec, Game, ObservedPlay, SolverConfig};
use proptest::prelude::*;

fn tight(lambda: f64) -> SolverConfig {
    SolverConfig {
        tolerance: 1e-14,
        ..SolverConfig::with_lambda(lambda)
    }
}

fn pq(p: f64, q: f64) -> ObservedPlay {
    ObservedPlay::complete(vec![vec![q, 1.0 - q], vec![p, 1.0 - p]], "t").unwrap()
}

/// Counts proportional to a fixture's reported frequencies.
fn scaled_counts(obs: &ObservedPlay, n: f64) -> ObservedPlay {
    let counts = obs
        .frequencies()
        .iter()
        .map(|row| row.iter().map(|f| (f.unwrap() * n).round() as u64).collect())
        .collect();
    ObservedPlay::from_counts(counts, obs.source()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_calibrations_reproduce_the_data(
        game in real_bimatrix(2, 2),
        f in (0.02f64..0.98, 0.02f64..0.98),
        focal in 0usize..2,
    ) {
        let obs = ObservedPlay::complete(vec![vec![f.0, 1.0 - f.0], vec![f.1, 1.0 - f.1]], "drawn").unwrap();
        let shape = FocalSpec::new(vec![BTreeSet::from([focal]), BTreeSet::new()], vec![0.0, 0.0]).unwrap();
        let options = CalibrateOptions::default();
        let fit = calibrate(&game, &obs, &shape, &options).unwrap();
        if fit.feasible {
            prop_assert!(fit.lambda > 0.0);
            prop_assert!(fit.forward_residual.unwrap() <= options.fit_tolerance);
        } else {
            prop_assert!(fit.explanation.is_some());
        }
    }

    #[test]
    fn planted_parameters_are_recovered(
        game in real_bimatrix(2, 2),
        lambda in 0.1f64..1.0,
        delta in 0.0f64..3.0,
    ) {
        let shape = FocalSpec::new(vec![BTreeSet::from([0]), BTreeSet::new()], vec![0.0, 0.0]).unwrap();
        let planted = solve_robust(&game, &shape.with_delta(0, delta).unwrap(), &tight(lambda)).unwrap();
        prop_assume!(planted.converged);
        prop_assume!(planted.profile.vectors().iter().flatten().all(|&p| p > 1e-4));
        let obs = ObservedPlay::from_profile(&planted.profile, "planted");
        let fit = calibrate(&game, &obs, &shape, &CalibrateOptions::default()).unwrap();
        prop_assert!(fit.feasible, "{:?}", fit.explanation);
        prop_assert!(fit.forward_residual.unwrap() <= 1e-9);
        prop_assert!((fit.lambda - lambda).abs() <= 1e-4 * lambda.max(1.0));
    }

    #[test]
    fn implied_lambda_ignores_payoff_shifts(
        game in real_bimatrix(2, 3),
        f in (0.05f64..0.95, 0.05f64..0.9, 0.05f64..0.9),
        shift in -40.0f64..40.0,
    ) {
        let col = vec![f.1, (1.0 - f.1) * f.2, (1.0 - f.1) * (1.0 - f.2)];
        let obs = ObservedPlay::complete(vec![vec![f.0, 1.0 - f.0], col], "drawn").unwrap();
        let shifted = game.shift_payoffs(0, shift);
        let plain = FocalSpec::none(&game);
        match (implied_lambda(&game, &obs, 0, (0, 1), &plain), implied_lambda(&shifted, &obs, 0, (0, 1), &plain)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()), "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn plain_logit_play_identifies_nothing(game in small_game(), lambda in 0.05f64..1.0) {
        let eq = solve_robust(&game, &FocalSpec::none(&game), &tight(lambda)).unwrap();
        prop_assume!(eq.converged);
        let id = identify_focal(&game, &ObservedPlay::from_profile(&eq.profile, "logit")).unwrap();
        for player in &id.players {
            prop_assert!(player.focal.is_empty() && player.non_focal.is_empty(), "{:?}", player.pairs);
        }
    }

    #[test]
    fn pair_rejection_matches_its_pattern(p in 0.0f64..1.0, q in 0.0f64..1.0, dp in -0.5f64..0.5, dq in -0.5f64..0.5) {
        let (p2, q2) = ((p + dp).clamp(0.0, 1.0), (q + dq).clamp(0.0, 1.0));
        let v = reject_qre_pair(&pq(p, q), &pq(p2, q2)).unwrap();
        prop_assert_eq!(v.rejected, p < p2 && q <= q2);
        prop_assert_eq!(v.rejected, !v.witness.is_empty());
        prop_assert_eq!(v.p, vec![p, p2]);
        prop_assert_eq!(v.q, vec![q, q2]);
    }
}

#[test]
fn falsification_examples() {
    assert!(reject_qre_pair(&pq(0.4, 0.5), &pq(0.5, 0.5)).unwrap().rejected);
    assert!(reject_qre_pair(&pq(0.4, 0.5), &pq(0.5, 0.6)).unwrap().rejected);
    assert!(!reject_qre_pair(&pq(0.4, 0.5), &pq(0.5, 0.4)).unwrap().rejected);
    assert!(!reject_qre_pair(&pq(0.5, 0.5), &pq(0.5, 0.6)).unwrap().rejected);

    let quad = |ps: [f64; 4], qs: [f64; 4]| {
        let obs: Vec<ObservedPlay> = ps.iter().zip(qs).map(|(&p, q)| pq(p, q)).collect();
        reject_focal_qre_quad([&obs[0], &obs[1], &obs[2], &obs[3]]).unwrap()
    };
    let v = quad([0.1, 0.2, 0.3, 0.4], [0.5, 0.5, 0.6, 0.7]);
    assert!(v.rejected);
    assert!(!v.witness.is_empty());
    assert!(!quad([0.1, 0.2, 0.2, 0.4], [0.5, 0.5, 0.6, 0.7]).rejected);
    assert!(!quad([0.1, 0.2, 0.3, 0.4], [0.5, 0.6, 0.55, 0.7]).rejected);
}

#[test]
fn cross_player_test_detects_a_planted_bias() {
    let fx = fixture("gh-mp-asym1").unwrap();
    let shape = FocalSpec::from_labels(&fx.game, &[vec!["U"], vec![]], vec![1.5, 0.0]).unwrap();
    let eq = solve_robust(&fx.game, &shape, &tight(0.45)).unwrap();
    assert!(eq.converged);
    let obs = ObservedPlay::from_profile(&eq.profile, "planted");
    let row = StrategyPair { player: 0, strategy: 0, alternative: 1 };
    let col = StrategyPair { player: 1, strategy: 1, alternative: 0 };
    let v = cross_player_focality_test(&fx.game, &obs, row, col, None).unwrap();
    assert!(v.fired, "statistic {}", v.statistic);
    assert!(!v.conclusion.is_empty());

    // Without the bias the same pairs sit exactly on the logit ratio.
    let plain = solve_robust(&fx.game, &shape.with_delta(0, 0.0).unwrap(), &tight(0.45)).unwrap();
    let obs = ObservedPlay::from_profile(&plain.profile, "plain");
    let v = cross_player_focality_test(&fx.game, &obs, row, col, None).unwrap();
    assert!(!v.fired, "statistic {}", v.statistic);
}

fn pennies_data(name: &str, observed: ObservedPlay) -> MleData {
    let fx = fixture(name).unwrap();
    MleData {
        shape: fx.paper_focal.clone().unwrap(),
        game: fx.game,
        observed,
    }
}

#[test]
fn mle_beats_the_truth_on_noiseless_counts() {
    let fx = fixture("gh-mp-asym2").unwrap();
    let shape = fx.paper_focal.clone().unwrap();
    let truth = solve(&fx.game, &shape.with_delta(0, 2.0).unwrap(), &tight(0.5)).unwrap();
    let counts = truth
        .profile
        .vectors()
        .iter()
        .map(|v| v.iter().map(|p| (p * 1e6).round() as u64).collect())
        .collect();
    let data = [pennies_data("gh-mp-asym2", ObservedPlay::from_counts(counts, "noiseless").unwrap())];
    let options = MleOptions::default();
    let fit = mle_fit(&data, &options).unwrap();
    let deltas = vec![2.0, 0.0];
    let at_truth = log_likelihood_at(&data, &[0.5], &[deltas], &options.solver).unwrap();
    assert!(fit.log_likelihood >= at_truth - 1e-9);
    assert!((fit.lambda() - 0.5).abs() < 1e-2, "{}", fit.lambda());
}

#[test]
fn mle_recovers_simulated_parameters() {
    let fx = fixture("gh-mp-asym2").unwrap();
    let shape = fx.paper_focal.clone().unwrap();
    let focal_player = (0..2).find(|&i| !shape.set(i).is_empty()).unwrap();
    let truth = solve_robust(&fx.game, &shape.with_delta(focal_player, 5.4).unwrap(), &tight(0.41)).unwrap();
    let counts = simulate_counts(&truth.profile, 10_000, 20_240_601).unwrap();
    let data = [pennies_data("gh-mp-asym2", ObservedPlay::from_counts(counts, "simulated").unwrap())];
    let fit = mle_fit(&data, &MleOptions::default()).unwrap();
    let game = &fit.games[0];
    assert!((game.lambda - 0.41).abs() <= 0.05, "lambda {}", game.lambda);
    assert!((game.deltas[focal_player] - 5.4).abs() <= 0.5, "delta {}", game.deltas[focal_player]);
}

#[test]
fn joint_fit_shares_precision_across_pennies_games() {
    let data: Vec<MleData> = ["gh-mp-asym1", "gh-mp-asym2"]
        .iter()
        .map(|name| {
            let fx = fixture(name).unwrap();
            pennies_data(name, scaled_counts(fx.observed.as_ref().unwrap(), 1000.0))
        })
        .collect();
    let options = MleOptions {
        policy: DeltaPolicy::PerPlayer,
        ..MleOptions::default()
    };
    let fit = mle_fit(&data, &options).unwrap();
    assert!(fit.games.iter().all(|g| (g.lambda - fit.lambda()).abs() < 1e-15));
    assert!((0.41..=0.45).contains(&fit.lambda()), "lambda {}", fit.lambda());
}

#[test]
fn calibration_ignores_deltas_in_the_shape() {
    let fx = fixture("gh-mp-asym2").unwrap();
    let obs = fx.observed.as_ref().unwrap();
    let shape = fx.paper_focal.clone().unwrap();
    let options = CalibrateOptions::default();
    let a = calibrate(&fx.game, obs, &shape, &options).unwrap();
    let b = calibrate(&fx.game, obs, &shape.with_deltas(vec![9.0, 9.0]).unwrap(), &options).unwrap();
    assert_eq!(a.lambda, b.lambda);
    assert_eq!(a.deltas, b.deltas);
}

#[test]
fn zero_policy_fits_plain_logit() {
    let game = Game::bimatrix("pennies", &["U", "D"], &["L", "R"], &[&[(9.0, 0.0), (0.0, 1.0)], &[(0.0, 1.0), (1.0, 0.0)]]).unwrap();
    let plain = FocalSpec::none(&game);
    let eq = solve(&game, &plain, &tight(0.7)).unwrap();
    let obs = ObservedPlay::from_profile(&eq.profile, "planted");
    let options = CalibrateOptions {
        policy: DeltaPolicy::Zero,
        ..CalibrateOptions::default()
    };
    let fit = calibrate(&game, &obs, &plain, &options).unwrap();
    assert!(fit.feasible);
    assert!((fit.lambda - 0.7).abs() < 1e-8);
    assert!(fit.deltas.iter().all(|&d| d == 0.0));
}
