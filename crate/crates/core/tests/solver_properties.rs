mod common;

use std::collections::BTreeSet;

use common::{real_bimatrix, integer_bimatrix};
use fqre::game::expected_utilities;
use fqre::solver::{logit_response, residual, solve, solve_continued, solve_from, solve_robust, trace_lambda_path};
use fqre::{FocalSpec, Game, MixedProfile, SolverConfig};
use proptest::collection::vec;
use proptest::prelude::*;

/// Largest gap between a profile and the plain softmax of its expected utilities.
fn plain_logit_gap(game: &Game, profile: &MixedProfile, lambda: f64) -> f64 {
    let mut gap: f64 = 0.0;
    for i in 0..game.num_players() {
        let u = expected_utilities(game, profile, i).unwrap();
        let w: Vec<f64> = u.iter().map(|x| (lambda * x).exp()).collect();
        let total: f64 = w.iter().sum();
        for (a, b) in w.iter().zip(profile.player(i)) {
            gap = gap.max((a / total - b).abs());
        }
    }
    gap
}

fn utilities_and_lambda() -> impl Strategy<Value = (Vec<f64>, f64, usize)> {
    (2usize..=6).prop_flat_map(|n| (vec(-10.0f64..10.0, n), 0.01f64..1.5, 0..n))
}

proptest! {
    #[test]
    fn logit_response_axioms((u, lambda, j) in utilities_and_lambda(), shift in -50.0f64..50.0) {
        let p = logit_response(&u, lambda).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
        for a in 0..u.len() {
            for b in 0..u.len() {
                if u[a] > u[b] {
                    prop_assert!(p[a] > p[b]);
                }
            }
        }
        let mut up = u.clone();
        up[j] += 0.5;
        prop_assert!(logit_response(&up, lambda).unwrap()[j] > p[j]);
        let eps = 1e-4;
        let mut nudged = u.clone();
        nudged[j] += eps;
        for (a, b) in logit_response(&nudged, lambda).unwrap().iter().zip(&p) {
            prop_assert!((a - b).abs() <= lambda * eps + 1e-9);
        }
        let shifted: Vec<f64> = u.iter().map(|x| x + shift).collect();
        for (a, b) in logit_response(&shifted, lambda).unwrap().iter().zip(&p) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_delta_and_full_sets_reduce_to_logit(
        game in prop_oneof![real_bimatrix(2, 2), real_bimatrix(2, 3)],
        lambda in 0.1f64..3.0,
        mask in 0u32..32,
        delta in 0.1f64..5.0,
    ) {
        let config = SolverConfig::with_lambda(lambda);
        let plain = solve_robust(&game, &FocalSpec::none(&game), &config).unwrap();
        prop_assert!(plain.converged);
        prop_assert!(plain_logit_gap(&game, &plain.profile, lambda) < 1e-9);

        let cols = game.num_strategies(1);
        let sets = vec![
            (0..2).filter(|s| mask & (1 << s) != 0).collect::<BTreeSet<_>>(),
            (0..cols).filter(|s| mask & (1 << (2 + s)) != 0).collect(),
        ];
        let inert = FocalSpec::new(sets, vec![0.0, 0.0]).unwrap();
        let zero = solve_robust(&game, &inert, &config).unwrap();
        prop_assert_eq!(&zero.profile, &plain.profile);

        let everything = FocalSpec::new(vec![(0..2).collect(), (0..cols).collect()], vec![delta, delta]).unwrap();
        let full = solve_robust(&game, &everything, &config).unwrap();
        // Uniform shifts cancel in the logit up to the rounding of u + delta.
        prop_assert!(full.profile.sup_distance(&plain.profile) < 1e-12);
    }

    #[test]
    fn converged_solves_are_fixed_points(
        game in integer_bimatrix(4),
        lambda in 0.0f64..2.0,
        deltas in (0.0f64..3.0, 0.0f64..3.0),
        mask in 0u32..256,
    ) {
        let sets = (0..2)
            .map(|i| (0..game.num_strategies(i)).filter(|s| mask & (1 << (4 * i + s)) != 0).collect())
            .collect();
        let spec = FocalSpec::new(sets, vec![deltas.0, deltas.1]).unwrap();
        let config = SolverConfig::with_lambda(lambda);
        let r = solve(&game, &spec, &config).unwrap();
        if r.converged {
            prop_assert!(residual(&game, &spec, lambda, &r.profile).unwrap() <= config.tolerance);
            prop_assert!(r.profile.vectors().iter().flatten().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn bias_raises_own_focal_probability(game in real_bimatrix(2, 2), player in 0usize..2, strategy in 0usize..2) {
        // Keep both players' responses contracting so the equilibrium is unique along the grid.
        let interaction = |i: usize| {
            let u = |a: usize, b: usize| game.payoff(&[a, b], i);
            if i == 0 { (u(0, 0) - u(1, 0) - u(0, 1) + u(1, 1)).abs() } else { (u(0, 0) - u(0, 1) - u(1, 0) + u(1, 1)).abs() }
        };
        let lambda = 3.5 / interaction(0).max(interaction(1)).max(1.0);
        let mut sets = vec![BTreeSet::new(), BTreeSet::new()];
        sets[player].insert(strategy);
        let shape = FocalSpec::new(sets, vec![0.0, 0.0]).unwrap();
        let config = SolverConfig::with_lambda(lambda);
        let mut start = MixedProfile::uniform(&game);
        let mut last = 0.0;
        for k in 0..=10 {
            let spec = shape.with_delta(player, 0.5 * k as f64).unwrap();
            let r = solve_from(&game, &spec, &config, start.clone()).unwrap();
            prop_assert!(r.converged);
            let p = r.profile.player(player)[strategy];
            prop_assert!(p >= last - 1e-12, "delta {}: {} after {}", 0.5 * k as f64, p, last);
            last = p;
            start = r.profile;
        }
    }
}

#[test]
fn trace_ends_where_continuation_does() {
    let game = Game::bimatrix(
        "pennies",
        &["U", "D"],
        &["L", "R"],
        &[&[(32.0, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
    )
    .unwrap();
    let spec = FocalSpec::none(&game);
    let config = SolverConfig::with_lambda(2.0);
    let path = trace_lambda_path(&game, &spec, 2.0, &config).unwrap();
    assert_eq!(path.len(), config.homotopy_steps);
    assert!(path.iter().all(|p| p.converged));
    assert!(path.windows(2).all(|w| w[0].lambda < w[1].lambda));
    let end = solve_continued(&game, &spec, &config).unwrap();
    assert_eq!(path.last().unwrap().profile, end.profile);
}

#[test]
fn rotating_games_converge_at_high_precision() {
    // Damped iteration alone cycles here; the Newton phase has to finish the job.
    let game = Game::bimatrix(
        "pennies",
        &["U", "D"],
        &["L", "R"],
        &[&[(32.0, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
    )
    .unwrap();
    let spec = FocalSpec::none(&game);
    for lambda in [1.0, 5.0, 20.0] {
        let r = solve(&game, &spec, &SolverConfig::with_lambda(lambda)).unwrap();
        assert!(r.converged, "lambda {lambda}: residual {}", r.residual);
        assert!(plain_logit_gap(&game, &r.profile, lambda) < 1e-9);
    }
}
