//! Focal logit equilibria.
//!
//! Equilibria are fixed points of `pi = sigma(u*(pi))`, where `u*` are focality-adjusted expected
//! utilities and `sigma` is the logit response with precision `lambda`. The solver runs a damped
//! simultaneous update from the uniform profile, halving the step whenever the residual grows
//! (strongly rotating games such as matching pennies at high precision need short steps to
//! contract). If a short damped phase does not converge, Newton's method on the log-odds
//! equations takes over from where it stopped. [`trace_lambda_path`] follows the principal
//! branch from `lambda = 0`, warm-starting each point from the previous one.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{HOMOTOPY_STEPS, PROBABILITY_FLOOR, SOLVER_DAMPING, SOLVER_MAX_ITERATIONS, SOLVER_TOLERANCE};
use crate::error::{ensure, Result};
use crate::focality::{focal_utilities_into, FocalSpec};
use crate::game::{advance, Game, MixedProfile};

/// The step never shrinks below this fraction of the configured damping.
const MIN_DAMPING_FRACTION: f64 = 1e-4;

/// Damped iterations tried before switching to Newton's method.
const PICARD_PROBE: usize = 2_000;

const NEWTON_MAX_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub homotopy_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            damping: SOLVER_DAMPING,
            tolerance: SOLVER_TOLERANCE,
            max_iterations: SOLVER_MAX_ITERATIONS,
            homotopy_steps: HOMOTOPY_STEPS,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        ensure!(
            self.lambda.is_finite() && self.lambda >= 0.0,
            InvalidParameter,
            "lambda must be a nonnegative real, got {}",
            self.lambda
        );
        ensure!(
            self.damping > 0.0 && self.damping <= 1.0,
            InvalidParameter,
            "damping must lie in (0, 1], got {}",
            self.damping
        );
        ensure!(
            self.tolerance > 0.0 && self.tolerance.is_finite(),
            InvalidParameter,
            "tolerance must be positive, got {}",
            self.tolerance
        );
        ensure!(self.max_iterations > 0, InvalidParameter, "max_iterations must be positive");
        ensure!(self.homotopy_steps > 0, InvalidParameter, "homotopy_steps must be positive");
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub profile: MixedProfile,
    pub residual: f64,
    pub iterations: usize,
    pub lambda: f64,
    pub converged: bool,
}

/// Logit choice probabilities `exp(lambda * u_j) / sum_k exp(lambda * u_k)`.
pub fn logit_response(utilities: &[f64], lambda: f64) -> Result<Vec<f64>> {
    ensure!(
        lambda.is_finite() && lambda >= 0.0,
        InvalidParameter,
        "lambda must be a nonnegative real, got {lambda}"
    );
    ensure!(!utilities.is_empty(), InvalidInput, "empty utility vector");
    ensure!(
        utilities.iter().all(|u| u.is_finite()),
        InvalidInput,
        "utilities must be finite"
    );
    let mut out = vec![0.0; utilities.len()];
    logit_into(utilities, lambda, &mut out);
    Ok(out)
}

fn logit_into(utilities: &[f64], lambda: f64, out: &mut [f64]) {
    let top = utilities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &u) in out.iter_mut().zip(utilities) {
        *o = (lambda * (u - top)).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Scratch space for repeated response evaluations on one game.
struct Workspace {
    utilities: Vec<Vec<f64>>,
    response: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(game: &Game) -> Self {
        let counts = game.strategy_counts();
        Self {
            utilities: counts.iter().map(|&j| vec![0.0; j]).collect(),
            response: counts.iter().map(|&j| vec![0.0; j]).collect(),
        }
    }

    /// Fills `response` with `sigma(u*(profile))` and returns the sup-norm gap to `profile`.
    fn respond(&mut self, game: &Game, spec: &FocalSpec, lambda: f64, profile: &MixedProfile) -> f64 {
        let mut gap: f64 = 0.0;
        for i in 0..game.num_players() {
            focal_utilities_into(game, spec, profile, i, &mut self.utilities[i]);
            logit_into(&self.utilities[i], lambda, &mut self.response[i]);
            for (r, p) in self.response[i].iter().zip(profile.player(i)) {
                gap = gap.max((r - p).abs());
            }
        }
        gap
    }
}

fn check_inputs(game: &Game, spec: &FocalSpec, config: &SolverConfig) -> Result<()> {
    config.check()?;
    spec.check(game)?;
    let report = game.validate();
    ensure!(report.is_ok(), InvalidInput, "{report}");
    Ok(())
}

/// Equilibrium reached from the uniform profile.
pub fn solve(game: &Game, spec: &FocalSpec, config: &SolverConfig) -> Result<EquilibriumResult> {
    solve_from(game, spec, config, MixedProfile::uniform(game))
}

/// Equilibrium reached from a supplied starting profile.
pub fn solve_from(
    game: &Game,
    spec: &FocalSpec,
    config: &SolverConfig,
    start: MixedProfile,
) -> Result<EquilibriumResult> {
    check_inputs(game, spec, config)?;
    start.check_shape(game)?;
    Ok(iterate(game, spec, config, start))
}

/// Runs a short damped phase, switches to Newton's method if that has not converged, and
/// spends any remaining budget on the damped update.
fn iterate(game: &Game, spec: &FocalSpec, config: &SolverConfig, start: MixedProfile) -> EquilibriumResult {
    let probe = picard(game, spec, config, start, config.max_iterations.min(PICARD_PROBE), 0);
    if probe.converged || probe.iterations >= config.max_iterations {
        return probe;
    }
    let polished = newton(game, spec, config, &probe);
    if polished.converged {
        return polished;
    }
    let best = if polished.residual < probe.residual { polished } else { probe };
    let used = best.iterations;
    let rest = picard(game, spec, config, best.profile.clone(), config.max_iterations - used, used);
    if rest.residual < best.residual { rest } else { best }
}

fn picard(
    game: &Game,
    spec: &FocalSpec,
    config: &SolverConfig,
    start: MixedProfile,
    budget: usize,
    already: usize,
) -> EquilibriumResult {
    let lambda = config.lambda;
    let mut d = config.damping;
    let min_damping = config.damping * MIN_DAMPING_FRACTION;
    let mut work = Workspace::new(game);
    let mut current = start.into_vectors();
    let mut profile = MixedProfile::from_vectors_unchecked(current.clone());
    let mut residual = work.respond(game, spec, lambda, &profile);
    let mut iterations = 0;
    while iterations < budget && residual > config.tolerance {
        iterations += 1;
        for (pi, resp) in current.iter_mut().zip(&work.response) {
            for (p, r) in pi.iter_mut().zip(resp) {
                *p = (1.0 - d) * *p + d * r;
            }
            // Keep the simplex exact so rounding does not drift across many iterations.
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= total);
        }
        profile = MixedProfile::from_vectors_unchecked(current.clone());
        let previous = residual;
        residual = work.respond(game, spec, lambda, &profile);
        // A growing residual means the damped map is not contracting here; shorten the step.
        if residual > previous && d > min_damping {
            d = (d * 0.5).max(min_damping);
        }
    }
    EquilibriumResult {
        profile,
        residual,
        iterations: already + iterations,
        lambda,
        converged: residual <= config.tolerance,
    }
}

/// Log-odds coordinates: `y_ij = ln(p_ij / p_iJ)` for every strategy but the last.
fn to_log_odds(profile: &MixedProfile) -> Vec<Vec<f64>> {
    profile
        .vectors()
        .iter()
        .map(|p| {
            let last = p[p.len() - 1].max(PROBABILITY_FLOOR);
            p[..p.len() - 1].iter().map(|&x| (x.max(PROBABILITY_FLOOR) / last).ln()).collect()
        })
        .collect()
}

fn from_log_odds(y: &[Vec<f64>]) -> MixedProfile {
    let vectors = y
        .iter()
        .map(|yi| {
            let mut full = yi.clone();
            full.push(0.0);
            let mut p = vec![0.0; full.len()];
            logit_into(&full, 1.0, &mut p);
            p
        })
        .collect();
    MixedProfile::from_vectors_unchecked(vectors)
}

/// `G(y)_ij = y_ij - lambda * (u*_ij - u*_iJ)`, which vanishes exactly at equilibrium.
fn log_odds_gap(game: &Game, spec: &FocalSpec, lambda: f64, y: &[Vec<f64>], work: &mut Workspace) -> Vec<f64> {
    let profile = from_log_odds(y);
    let mut g = Vec::new();
    for (i, yi) in y.iter().enumerate() {
        focal_utilities_into(game, spec, &profile, i, &mut work.utilities[i]);
        let u = &work.utilities[i];
        let last = u[u.len() - 1];
        g.extend(yi.iter().zip(u).map(|(&y, &uj)| y - lambda * (uj - last)));
    }
    g
}

/// Jacobian of [`log_odds_gap`]. Only cross-player terms depend on `y`:
/// `d u_ij / d y_kl = p_kl * (U_ij|kl - u_ij)`, where `U_ij|kl` is player i's payoff from `j`
/// when player k plays `l` and everyone else mixes.
fn log_odds_jacobian(game: &Game, lambda: f64, profile: &MixedProfile) -> DMatrix<f64> {
    let n = game.num_players();
    let counts = game.strategy_counts();
    let offsets: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &j| {
            let at = *acc;
            *acc += j - 1;
            Some(at)
        })
        .collect();
    let dim: usize = counts.iter().map(|&j| j - 1).sum();
    // conditional[i][k][s_i * J_k + s_k] = E[u_i | s_i, s_k].
    let mut conditional: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..n).map(|k| if k == i { Vec::new() } else { vec![0.0; counts[i] * counts[k]] }).collect())
        .collect();
    let mut s = vec![0usize; n];
    for _ in 0..game.num_profiles() {
        let cell = game.payoffs_at(&s);
        for i in 0..n {
            for k in (0..n).filter(|&k| k != i) {
                let w: f64 = (0..n)
                    .filter(|&q| q != i && q != k)
                    .map(|q| profile.player(q)[s[q]])
                    .product();
                if w != 0.0 {
                    conditional[i][k][s[i] * counts[k] + s[k]] += cell[i] * w;
                }
            }
        }
        advance(&mut s, &counts);
    }
    let mut jac = DMatrix::identity(dim, dim);
    for i in 0..n {
        let last_i = counts[i] - 1;
        for k in (0..n).filter(|&k| k != i) {
            let c = &conditional[i][k];
            let pk = profile.player(k);
            // u_ij as the pk-weighted average of the conditional payoffs.
            let mean = |j: usize| (0..counts[k]).map(|l| pk[l] * c[j * counts[k] + l]).sum::<f64>();
            let (mean_last, last_row) = (mean(last_i), last_i * counts[k]);
            for j in 0..last_i {
                let mean_j = mean(j);
                for l in 0..counts[k] - 1 {
                    let du = (c[j * counts[k] + l] - mean_j) - (c[last_row + l] - mean_last);
                    jac[(offsets[i] + j, offsets[k] + l)] -= lambda * pk[l] * du;
                }
            }
        }
    }
    jac
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Newton's method on the log-odds equations, with a backtracking line search on their
/// sup-norm. Starts from `from` and reports the probability residual like the damped update.
fn newton(game: &Game, spec: &FocalSpec, config: &SolverConfig, from: &EquilibriumResult) -> EquilibriumResult {
    let lambda = config.lambda;
    let mut work = Workspace::new(game);
    let mut y = to_log_odds(&from.profile);
    let mut g = log_odds_gap(game, spec, lambda, &y, &mut work);
    let mut profile = from_log_odds(&y);
    let mut residual = work.respond(game, spec, lambda, &profile);
    let mut iterations = from.iterations;
    for _ in 0..NEWTON_MAX_STEPS {
        if residual <= config.tolerance {
            break;
        }
        iterations += 1;
        let jac = log_odds_jacobian(game, lambda, &profile);
        let rhs = DVector::from_iterator(g.len(), g.iter().map(|x| -x));
        let Some(step) = jac.lu().solve(&rhs) else { break };
        let current = sup(&g);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut k = 0;
            let trial: Vec<Vec<f64>> = y
                .iter()
                .map(|yi| {
                    yi.iter()
                        .map(|&v| {
                            let next = v + t * step[k];
                            k += 1;
                            next
                        })
                        .collect()
                })
                .collect();
            let trial_g = log_odds_gap(game, spec, lambda, &trial, &mut work);
            if sup(&trial_g) < current && trial_g.iter().all(|x| x.is_finite()) {
                y = trial;
                g = trial_g;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        profile = from_log_odds(&y);
        residual = work.respond(game, spec, lambda, &profile);
    }
    EquilibriumResult {
        profile,
        residual,
        iterations,
        lambda,
        converged: residual <= config.tolerance,
    }
}

/// Solves from the uniform profile, halving the damping on non-convergence up to `retries` times.
pub fn solve_with_retries(
    game: &Game,
    spec: &FocalSpec,
    config: &SolverConfig,
    retries: usize,
) -> Result<EquilibriumResult> {
    let mut config = *config;
    let mut result = solve(game, spec, &config)?;
    for _ in 0..retries {
        if result.converged {
            break;
        }
        config.damping /= 2.0;
        result = solve(game, spec, &config)?;
    }
    Ok(result)
}

/// Direct solve with damping retries, then lambda continuation if that still has not
/// converged. Returns whichever attempt got the smaller residual.
pub fn solve_robust(game: &Game, spec: &FocalSpec, config: &SolverConfig) -> Result<EquilibriumResult> {
    let direct = solve_with_retries(game, spec, config, 3)?;
    if direct.converged {
        return Ok(direct);
    }
    let continued = solve_continued(game, spec, config)?;
    Ok(if continued.residual < direct.residual { continued } else { direct })
}

/// Solves at `config.lambda` by following the principal branch from `lambda = 0`.
pub fn solve_continued(game: &Game, spec: &FocalSpec, config: &SolverConfig) -> Result<EquilibriumResult> {
    let path = trace_lambda_path(game, spec, config.lambda, config)?;
    Ok(path.into_iter().last().expect("path is never empty"))
}

/// Sup-norm gap between `profile` and the focal logit response to it.
pub fn residual(game: &Game, spec: &FocalSpec, lambda: f64, profile: &MixedProfile) -> Result<f64> {
    ensure!(
        lambda.is_finite() && lambda >= 0.0,
        InvalidParameter,
        "lambda must be a nonnegative real, got {lambda}"
    );
    spec.check(game)?;
    profile.check_shape(game)?;
    Ok(Workspace::new(game).respond(game, spec, lambda, profile))
}

/// The grid of `steps` lambda values used by [`trace_lambda_path`].
///
/// Starts at 0, then roughly half the points are geometric from `lambda_max * 5e-4` up to
/// `lambda_max / 2`, and the rest are evenly spaced up to `lambda_max`.
pub fn lambda_grid(lambda_max: f64, steps: usize) -> Vec<f64> {
    if lambda_max == 0.0 || steps <= 1 {
        return if lambda_max == 0.0 { vec![0.0] } else { vec![lambda_max] };
    }
    let mut grid = vec![0.0];
    let rest = steps - 1;
    let geometric = rest / 2;
    let linear = rest - geometric;
    let half = lambda_max / 2.0;
    for k in 1..=geometric {
        let exponent = (geometric - k) as f64 / geometric as f64;
        grid.push(half * 1e-3f64.powf(exponent));
    }
    let from = if geometric > 0 { half } else { 0.0 };
    for k in 1..=linear {
        grid.push(from + (lambda_max - from) * k as f64 / linear as f64);
    }
    *grid.last_mut().expect("nonempty") = lambda_max;
    grid
}

/// Equilibria along the principal branch at every point of [`lambda_grid`].
pub fn trace_lambda_path(
    game: &Game,
    spec: &FocalSpec,
    lambda_max: f64,
    config: &SolverConfig,
) -> Result<Vec<EquilibriumResult>> {
    ensure!(
        lambda_max.is_finite() && lambda_max >= 0.0,
        InvalidParameter,
        "lambda_max must be a nonnegative real, got {lambda_max}"
    );
    let base = SolverConfig {
        lambda: lambda_max,
        ..*config
    };
    check_inputs(game, spec, &base)?;
    let mut start = MixedProfile::uniform(game);
    let mut path = Vec::new();
    for lambda in lambda_grid(lambda_max, config.homotopy_steps) {
        let point = iterate(game, spec, &SolverConfig { lambda, ..base }, start.clone());
        start = point.profile.clone();
        path.push(point);
    }
    Ok(path)
}
