//! Maximum-likelihood fits of `(lambda, delta)` to observed choice counts.
//!
//! Each candidate parameter vector is scored by solving every game for its focal logit
//! equilibrium and summing the multinomial log-likelihood of the counts. The optimizer is a
//! coarse grid over the parameter box followed by compass search from the best grid point.
//! Grid points are scored in parallel and reduced in grid order, so results do not depend on
//! scheduling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::calibrate::{observed_gap, DeltaPolicy};
use crate::config::PROBABILITY_FLOOR;
use crate::error::{ensure, Error, Result};
use crate::focality::FocalSpec;
use crate::game::{Game, MixedProfile};
use crate::observed::ObservedPlay;
use crate::solver::{solve_with_retries, SolverConfig};

/// One game with its counts and the focal sets whose biases are estimated.
#[derive(Debug, Clone)]
pub struct MleData {
    pub game: Game,
    pub observed: ObservedPlay,
    pub shape: FocalSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// One lambda for all games instead of one per game.
    pub share_lambda: bool,
    pub policy: DeltaPolicy,
    pub lambda_max: f64,
    pub delta_max: f64,
    /// Grid points per parameter before refinement (reduced if the budget demands).
    pub grid_points: usize,
    /// Largest number of parameter vectors scored.
    pub max_evaluations: usize,
    /// Refinement stops when every step is below this fraction of its parameter range.
    pub refine_tolerance: f64,
    pub solver: SolverConfig,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            share_lambda: true,
            policy: DeltaPolicy::Shared,
            lambda_max: 3.0,
            delta_max: 20.0,
            grid_points: 17,
            max_evaluations: 20_000,
            refine_tolerance: 1e-7,
            solver: SolverConfig {
                max_iterations: 20_000,
                ..SolverConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameFit {
    pub name: String,
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub log_likelihood: f64,
    /// Sup-norm gap between the fitted equilibrium and the observed frequencies.
    pub fit_residual: f64,
    pub converged: bool,
    pub profile: MixedProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MleEstimate {
    pub log_likelihood: f64,
    pub games: Vec<GameFit>,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    pub warnings: Vec<String>,
}

impl MleEstimate {
    /// The shared lambda, or the first game's when lambdas are per game.
    pub fn lambda(&self) -> f64 {
        self.games[0].lambda
    }
}

/// Where each game reads its parameters from in the flat parameter vector.
struct Layout {
    lambda_index: Vec<usize>,
    /// Per game, per player: index of the delta parameter, if the player has one.
    delta_index: Vec<Vec<Option<usize>>>,
    upper: Vec<f64>,
}

fn layout(data: &[MleData], options: &MleOptions) -> Layout {
    let mut upper = Vec::new();
    let mut lambda_index = Vec::new();
    if options.share_lambda {
        upper.push(options.lambda_max);
        lambda_index = vec![0; data.len()];
    } else {
        for _ in data {
            lambda_index.push(upper.len());
            upper.push(options.lambda_max);
        }
    }
    let mut delta_index = Vec::new();
    for d in data {
        let n = d.game.num_players();
        let mut slots = vec![None; n];
        let separating: Vec<usize> = (0..n).filter(|&i| !d.shape.set_is_trivial(&d.game, i)).collect();
        match options.policy {
            DeltaPolicy::Zero => {}
            DeltaPolicy::Shared => {
                if !separating.is_empty() {
                    for &i in &separating {
                        slots[i] = Some(upper.len());
                    }
                    upper.push(options.delta_max);
                }
            }
            DeltaPolicy::PerPlayer => {
                for &i in &separating {
                    slots[i] = Some(upper.len());
                    upper.push(options.delta_max);
                }
            }
        }
        delta_index.push(slots);
    }
    Layout {
        lambda_index,
        delta_index,
        upper,
    }
}

fn log_likelihood(counts: &[Vec<u64>], profile: &MixedProfile) -> f64 {
    counts
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .zip(profile.player(i))
                .map(|(&c, &p)| if c == 0 { 0.0 } else { c as f64 * p.max(PROBABILITY_FLOOR).ln() })
                .sum::<f64>()
        })
        .sum()
}

fn fit_game(d: &MleData, layout: &Layout, g: usize, theta: &[f64], solver: &SolverConfig) -> Result<GameFit> {
    let lambda = theta[layout.lambda_index[g]];
    let deltas: Vec<f64> = layout.delta_index[g]
        .iter()
        .map(|slot| slot.map_or(0.0, |k| theta[k]))
        .collect();
    let spec = d.shape.with_deltas(deltas.clone())?;
    let config = SolverConfig { lambda, ..*solver };
    let eq = solve_with_retries(&d.game, &spec, &config, 2)?;
    let counts = d.observed.counts().expect("checked on entry");
    Ok(GameFit {
        name: d.game.name().to_string(),
        lambda,
        deltas,
        log_likelihood: log_likelihood(counts, &eq.profile),
        fit_residual: observed_gap(&d.observed, &eq.profile),
        converged: eq.converged,
        profile: eq.profile,
    })
}

fn score(data: &[MleData], layout: &Layout, theta: &[f64], solver: &SolverConfig) -> f64 {
    data.iter()
        .enumerate()
        .map(|(g, d)| fit_game(d, layout, g, theta, solver).map_or(f64::NEG_INFINITY, |f| f.log_likelihood))
        .sum()
}

/// Multinomial log-likelihood of the counts at the given parameters, with the same layout
/// rules as [`mle_fit`]: `lambdas` has one entry (shared) or one per game, and `deltas`
/// holds per-game, per-player biases.
pub fn log_likelihood_at(data: &[MleData], lambdas: &[f64], deltas: &[Vec<f64>], solver: &SolverConfig) -> Result<f64> {
    ensure!(deltas.len() == data.len(), InvalidInput, "one delta vector per game is required");
    let mut total = 0.0;
    for (g, d) in data.iter().enumerate() {
        let counts = d
            .observed
            .counts()
            .ok_or_else(|| Error::MissingData(format!("game `{}` has no counts", d.game.name())))?;
        let lambda = if lambdas.len() == 1 { lambdas[0] } else { lambdas[g] };
        let spec = d.shape.with_deltas(deltas[g].clone())?;
        let eq = solve_with_retries(&d.game, &spec, &SolverConfig { lambda, ..*solver }, 2)?;
        total += log_likelihood(counts, &eq.profile);
    }
    Ok(total)
}

/// Maximizes the joint log-likelihood of all games' counts.
pub fn mle_fit(data: &[MleData], options: &MleOptions) -> Result<MleEstimate> {
    ensure!(!data.is_empty(), InvalidInput, "no games to fit");
    for d in data {
        d.observed.check_shape(&d.game)?;
        d.shape.check(&d.game)?;
        ensure!(
            d.observed.counts().is_some(),
            MissingData,
            "game `{}` has no counts",
            d.game.name()
        );
    }
    ensure!(
        options.lambda_max > 0.0 && options.delta_max >= 0.0,
        InvalidParameter,
        "parameter bounds must be positive"
    );
    ensure!(options.grid_points >= 2, InvalidParameter, "grid needs at least two points per parameter");
    options.solver.check()?;

    let layout = layout(data, options);
    let dims = layout.upper.len();
    let mut warnings = Vec::new();

    // Coarse grid, shrunk to fit half the evaluation budget.
    let mut k = options.grid_points;
    while k > 2 && k.saturating_pow(dims as u32) > options.max_evaluations / 2 {
        k -= 1;
    }
    if k < options.grid_points {
        warnings.push(format!("grid reduced to {k} points per parameter to respect the budget"));
    }
    let total = k.pow(dims as u32);
    let point = |mut index: usize| -> Vec<f64> {
        (0..dims)
            .map(|d| {
                let step = index % k;
                index /= k;
                layout.upper[d] * step as f64 / (k - 1) as f64
            })
            .collect()
    };
    let scores: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| score(data, &layout, &point(idx), &options.solver))
        .collect();
    let mut evaluations = total;
    let (best_idx, mut best) = scores
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
    let mut theta = point(best_idx);

    // Compass search from the best grid point.
    let mut steps: Vec<f64> = layout.upper.iter().map(|u| u / (k - 1) as f64).collect();
    let mut budget_exhausted = false;
    loop {
        if steps.iter().zip(&layout.upper).all(|(s, u)| *s <= options.refine_tolerance * u) {
            break;
        }
        if evaluations + 2 * dims > options.max_evaluations {
            budget_exhausted = true;
            break;
        }
        let candidates: Vec<Vec<f64>> = (0..dims)
            .flat_map(|d| [-1.0, 1.0].map(|sign| (d, sign)))
            .map(|(d, sign)| {
                let mut t = theta.clone();
                t[d] = (t[d] + sign * steps[d]).clamp(0.0, layout.upper[d]);
                t
            })
            .collect();
        let values: Vec<f64> = candidates
            .par_iter()
            .map(|t| score(data, &layout, t, &options.solver))
            .collect();
        evaluations += candidates.len();
        let (arg, value) = values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
        if value > best {
            best = value;
            theta = candidates[arg].clone();
        } else {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    if budget_exhausted {
        warnings.push(format!("evaluation budget of {} exhausted; returning the best point found", options.max_evaluations));
    }

    let games = data
        .iter()
        .enumerate()
        .map(|(g, d)| fit_game(d, &layout, g, &theta, &options.solver))
        .collect::<Result<Vec<_>>>()?;
    for fit in &games {
        if !fit.converged {
            warnings.push(format!("equilibrium of `{}` did not converge at the estimate", fit.name));
        }
    }
    for (d, upper) in theta.iter().zip(&layout.upper) {
        if *d >= *upper {
            warnings.push(format!("an estimate sits on its upper bound {upper}"));
        }
    }
    Ok(MleEstimate {
        log_likelihood: games.iter().map(|g| g.log_likelihood).sum(),
        games,
        evaluations,
        budget_exhausted,
        warnings,
    })
}

/// Multinomial choice counts drawn from `profile`, `draws` per player, reproducible from `seed`.
pub fn simulate_counts(profile: &MixedProfile, draws: u64, seed: u64) -> Result<Vec<Vec<u64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    profile
        .vectors()
        .iter()
        .map(|p| {
            let dist = WeightedIndex::new(p).map_err(|e| Error::InvalidInput(e.to_string()))?;
            let mut counts = vec![0u64; p.len()];
            for _ in 0..draws {
                counts[dist.sample(&mut rng)] += 1;
            }
            Ok(counts)
        })
        .collect()
}
