//! Calibration of `(lambda, delta)` from observed frequencies.
//!
//! With `theta_i = lambda * delta_i` the log-odds equations are linear in the unknowns, so the
//! estimate is a nonnegative least-squares fit; an exactly determined system (one equation per
//! unknown) is solved in closed form by the same route. The estimate is then forward-solved and
//! compared with the observations, since a least-squares fit can exist without any equilibrium
//! reproducing the data.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::utilities_at_observed;
use crate::config::CALIBRATION_FIT_TOLERANCE;
use crate::error::{ensure, Error, Result};
use crate::focality::FocalSpec;
use crate::game::{Game, MixedProfile};
use crate::observed::ObservedPlay;
use crate::solver::{solve_from, solve_robust, EquilibriumResult, SolverConfig};

/// How focal biases are parameterized during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPolicy {
    /// Plain logit: every delta fixed at zero.
    Zero,
    /// One delta shared by all players with a separating focal set.
    #[default]
    Shared,
    /// A separate delta per player.
    PerPlayer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrateOptions {
    pub policy: DeltaPolicy,
    /// Largest sup-norm gap between forward solution and observations that still counts as a fit.
    pub fit_tolerance: f64,
    pub solver: SolverConfig,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        Self {
            policy: DeltaPolicy::Shared,
            fit_tolerance: CALIBRATION_FIT_TOLERANCE,
            solver: SolverConfig::default(),
        }
    }
}

/// Precision implied by one log-odds equation at the calibrated deltas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpliedLambda {
    pub player: usize,
    pub strategies: (String, String),
    /// `None` when the focal utility gap is zero.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub policy: DeltaPolicy,
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub implied_lambdas: Vec<ImpliedLambda>,
    pub equations: usize,
    pub unknowns: usize,
    /// Largest absolute log-odds residual of the fitted linear system.
    pub log_odds_residual: f64,
    /// Equilibrium at the estimates, when lambda is positive.
    pub forward: Option<EquilibriumResult>,
    /// Sup-norm gap between the forward equilibrium and every reported frequency.
    pub forward_residual: Option<f64>,
    pub feasible: bool,
    pub explanation: Option<String>,
}

/// Forward check of a given parameter pair. The equilibrium is searched from the observed
/// profile when it is complete.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterCheck {
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub equilibrium: EquilibriumResult,
    pub forward_residual: f64,
}

struct Equation {
    player: usize,
    pair: (usize, usize),
    log_odds: f64,
    utility_gap: f64,
    focal_gap: f64,
}

fn build_equations(game: &Game, obs: &ObservedPlay, shape: &FocalSpec) -> Result<Vec<Equation>> {
    let plain = FocalSpec::none(game);
    let mut equations = Vec::new();
    for player in 0..game.num_players() {
        let interior: Vec<usize> = (0..game.num_strategies(player))
            .filter(|&j| matches!(obs.frequency(player, j), Some(f) if f > 0.0 && f < 1.0))
            .collect();
        if interior.len() < 2 {
            continue;
        }
        let u = utilities_at_observed(game, &plain, obs, player)?;
        let reference = interior[0];
        let f_ref = obs.require(player, reference)?;
        for &j in &interior[1..] {
            let f = obs.require(player, j)?;
            let indicator = |s: usize| if shape.is_focal(player, s) { 1.0 } else { 0.0 };
            equations.push(Equation {
                player,
                pair: (j, reference),
                log_odds: (f / f_ref).ln(),
                utility_gap: u[j] - u[reference],
                focal_gap: indicator(j) - indicator(reference),
            });
        }
    }
    Ok(equations)
}

/// Nonnegative least squares by enumerating active sets; the systems here have a handful of
/// unknowns. Returns the coefficients and the unconstrained solution.
fn nnls(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let m = x.ncols();
    ensure!(m <= 16, InvalidInput, "too many calibration unknowns ({m})");
    let lstsq = |cols: &[usize]| -> Option<DVector<f64>> {
        let sub = DMatrix::from_fn(x.nrows(), cols.len(), |r, c| x[(r, cols[c])]);
        sub.svd(true, true).solve(y, 1e-12).ok()
    };
    let all: Vec<usize> = (0..m).collect();
    let unconstrained = lstsq(&all)
        .ok_or_else(|| Error::Indeterminate("calibration system could not be solved".into()))?;
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let cols: Vec<usize> = (0..m).filter(|&c| mask & (1 << c) != 0).collect();
        let mut beta = DVector::zeros(m);
        if !cols.is_empty() {
            let Some(sol) = lstsq(&cols) else { continue };
            if sol.iter().any(|&b| b < 0.0) {
                continue;
            }
            for (c, &col) in cols.iter().enumerate() {
                beta[col] = sol[c];
            }
        }
        let sse = (x * &beta - y).norm_squared();
        if best.as_ref().is_none_or(|(b, _)| sse < *b - 1e-15) {
            best = Some((sse, beta));
        }
    }
    Ok((best.expect("the empty active set is always feasible").1, unconstrained))
}

/// Equilibrium at `(lambda, deltas)` on the focal sets of `shape`, with its gap to `obs`.
pub fn evaluate_parameters(
    game: &Game,
    obs: &ObservedPlay,
    shape: &FocalSpec,
    lambda: f64,
    deltas: &[f64],
    solver: &SolverConfig,
) -> Result<ParameterCheck> {
    obs.check_shape(game)?;
    let spec = shape.with_deltas(deltas.to_vec())?;
    let start = obs.to_profile().ok();
    let equilibrium = forward_solve(game, &spec, lambda, solver, start)?;
    let forward_residual = observed_gap(obs, &equilibrium.profile);
    Ok(ParameterCheck {
        lambda,
        deltas: deltas.to_vec(),
        equilibrium,
        forward_residual,
    })
}

/// Solves from `start` (the observed profile, when complete) so that the equilibrium nearest
/// the data is the one compared with it; falls back to the uniform start with smaller steps
/// and then to lambda continuation.
pub(crate) fn forward_solve(
    game: &Game,
    spec: &FocalSpec,
    lambda: f64,
    solver: &SolverConfig,
    start: Option<MixedProfile>,
) -> Result<EquilibriumResult> {
    let config = SolverConfig { lambda, ..*solver };
    if let Some(start) = start {
        let near = solve_from(game, spec, &config, start)?;
        if near.converged {
            return Ok(near);
        }
    }
    solve_robust(game, spec, &config)
}

/// Sup-norm gap between a profile and every reported frequency.
pub(crate) fn observed_gap(obs: &ObservedPlay, profile: &MixedProfile) -> f64 {
    let mut gap: f64 = 0.0;
    for (i, row) in obs.frequencies().iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            if let Some(f) = f {
                gap = gap.max((profile.player(i)[j] - f).abs());
            }
        }
    }
    gap
}

/// Fits `(lambda, delta)` to the observed frequencies on the focal sets of `shape`.
///
/// Deltas in `shape` are ignored. Strategies observed with frequency 0 or 1 drop out of the
/// log-odds equations. The result is feasible when the fitted lambda is positive and the
/// forward equilibrium matches every reported frequency within `options.fit_tolerance`.
pub fn calibrate(
    game: &Game,
    obs: &ObservedPlay,
    shape: &FocalSpec,
    options: &CalibrateOptions,
) -> Result<CalibrationResult> {
    shape.check(game)?;
    obs.check_shape(game)?;
    for k in 0..game.num_players() {
        ensure!(
            obs.is_complete_for(k),
            MissingData,
            "calibration needs complete frequencies; player {k} has unreported entries"
        );
    }
    let equations = build_equations(game, obs, shape)?;
    ensure!(
        !equations.is_empty(),
        Boundary,
        "no player has two strategies with frequencies in (0, 1)"
    );

    // Column 0 is lambda; the rest are theta groups, each owning a set of players.
    let n = game.num_players();
    let separating: Vec<usize> = (0..n).filter(|&i| !shape.set_is_trivial(game, i)).collect();
    let groups: Vec<Vec<usize>> = match options.policy {
        DeltaPolicy::Zero => Vec::new(),
        DeltaPolicy::Shared if separating.is_empty() => Vec::new(),
        DeltaPolicy::Shared => vec![separating.clone()],
        DeltaPolicy::PerPlayer => separating.iter().map(|&i| vec![i]).collect(),
    };
    let unknowns = 1 + groups.len();
    ensure!(
        equations.len() >= unknowns,
        Indeterminate,
        "{} log-odds equations cannot determine {unknowns} unknowns",
        equations.len()
    );
    let x = DMatrix::from_fn(equations.len(), unknowns, |r, c| {
        let eq = &equations[r];
        if c == 0 {
            eq.utility_gap
        } else if groups[c - 1].contains(&eq.player) {
            eq.focal_gap
        } else {
            0.0
        }
    });
    ensure!(
        x.rank(1e-12) == unknowns,
        Indeterminate,
        "the log-odds equations do not separate lambda from the focal biases"
    );
    let y = DVector::from_iterator(equations.len(), equations.iter().map(|e| e.log_odds));
    let (beta, unconstrained) = nnls(&x, &y)?;
    let log_odds_residual = (&x * &beta - &y).amax();

    let lambda = beta[0];
    let mut deltas = vec![0.0; n];
    if lambda > 0.0 {
        for (g, players) in groups.iter().enumerate() {
            for &i in players {
                deltas[i] = beta[g + 1] / lambda;
            }
        }
    }

    let mut notes = Vec::new();
    if unconstrained[0] < 0.0 {
        notes.push(format!(
            "the log-odds equations call for lambda = {:.6} < 0",
            unconstrained[0]
        ));
    }
    for (g, players) in groups.iter().enumerate() {
        if unconstrained[g + 1] < 0.0 {
            notes.push(format!(
                "the log-odds equations call for a negative focal bias for player(s) {players:?}"
            ));
        }
    }

    let (forward, forward_residual) = if lambda > 0.0 {
        let check = evaluate_parameters(game, obs, shape, lambda, &deltas, &options.solver)?;
        if !check.equilibrium.converged {
            notes.push(format!(
                "the forward solve did not converge (residual {:.3e})",
                check.equilibrium.residual
            ));
        }
        (Some(check.equilibrium), Some(check.forward_residual))
    } else {
        notes.push("no positive lambda fits the log-odds equations".to_string());
        (None, None)
    };
    if let Some(r) = forward_residual {
        if r > options.fit_tolerance {
            notes.push(format!(
                "the closest nonnegative parameters miss the observed frequencies by {r:.4}"
            ));
        }
    }
    let feasible = lambda > 0.0
        && forward.as_ref().is_some_and(|f| f.converged)
        && forward_residual.is_some_and(|r| r <= options.fit_tolerance);

    let spec = shape.with_deltas(deltas.clone())?;
    let implied_lambdas = equations
        .iter()
        .map(|eq| {
            let u = utilities_at_observed(game, &spec, obs, eq.player)?;
            let gap = u[eq.pair.0] - u[eq.pair.1];
            let labels = game.strategies(eq.player);
            Ok(ImpliedLambda {
                player: eq.player,
                strategies: (labels[eq.pair.0].clone(), labels[eq.pair.1].clone()),
                lambda: (gap.abs() > 1e-12).then(|| eq.log_odds / gap),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CalibrationResult {
        policy: options.policy,
        lambda,
        deltas,
        implied_lambdas,
        equations: equations.len(),
        unknowns,
        log_odds_residual,
        forward,
        forward_residual,
        feasible,
        explanation: (!notes.is_empty()).then(|| notes.join("; ")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeSet;

    fn pennies(u_l: f64) -> Game {
        Game::bimatrix(
            "mp",
            &["U", "D"],
            &["L", "R"],
            &[&[(u_l, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
        )
        .unwrap()
    }

    fn shape(row: &[usize], col: &[usize]) -> FocalSpec {
        FocalSpec::new(
            vec![row.iter().copied().collect::<BTreeSet<_>>(), col.iter().copied().collect()],
            vec![0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn gamma3_closed_form() {
        let g = pennies(4.4);
        let o = ObservedPlay::complete(vec![vec![0.08, 0.92], vec![0.8, 0.2]], "t").unwrap();
        let r = calibrate(&g, &o, &shape(&[1], &[]), &CalibrateOptions::default()).unwrap();
        // Oracle: column equation fixes lambda, row equation then fixes theta.
        let lambda = (0.8f64 / 0.2).ln() / (4.0 * 0.08 + 8.0 * 0.92 - 8.0 * 0.08 - 4.0 * 0.92);
        let du_row = (4.4 * 0.8 + 4.0 * 0.2) - (4.0 * 0.8 + 8.0 * 0.2);
        let delta = (du_row * lambda - (0.08f64 / 0.92).ln()) / lambda;
        assert_abs_diff_eq!(r.lambda, lambda, epsilon = 1e-10);
        assert_abs_diff_eq!(r.deltas[0], delta, epsilon = 1e-8);
        assert!(r.feasible);
        assert!(r.forward_residual.unwrap() < 1e-8);
    }

    #[test]
    fn plain_logit_cannot_fit_m1() {
        let g = Game::bimatrix(
            "m1",
            &["U", "D"],
            &["L", "R"],
            &[&[(4.0, 4.0), (4.0, 4.0)], &[(0.0, 1.0), (6.0, 3.0)]],
        )
        .unwrap();
        let o = ObservedPlay::complete(vec![vec![0.57, 0.43], vec![0.2, 0.8]], "t").unwrap();
        let options = CalibrateOptions {
            policy: DeltaPolicy::Zero,
            ..CalibrateOptions::default()
        };
        let r = calibrate(&g, &o, &shape(&[0], &[1]), &options).unwrap();
        assert!(!r.feasible);
        assert!(r.explanation.is_some());
        let focal = calibrate(&g, &o, &shape(&[0], &[1]), &CalibrateOptions::default()).unwrap();
        assert!(focal.feasible);
    }

    #[test]
    fn missing_data_is_an_error() {
        let g = pennies(8.0);
        let o = ObservedPlay::new(vec![vec![Some(0.5), Some(0.5)], vec![None, Some(0.6)]], "t").unwrap();
        assert!(matches!(
            calibrate(&g, &o, &shape(&[], &[]), &CalibrateOptions::default()),
            Err(Error::MissingData(_))
        ));
    }

    #[test]
    fn nnls_clamps_negative_coefficients() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let y = DVector::from_vec(vec![2.0, -3.0]);
        let (beta, raw) = nnls(&x, &y).unwrap();
        assert_eq!(beta.as_slice(), &[2.0, 0.0]);
        assert_abs_diff_eq!(raw[1], -3.0, epsilon = 1e-12);
    }
}
