//! Finite normal-form games, mixed profiles and expected utilities.
//!
//! Payoffs live in one dense buffer ordered by pure profile (row-major over the
//! players' strategy indices, last player fastest) and then by player, so cell
//! `(s_1, ..., s_n)` occupies `n` consecutive entries.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::config::SIMPLEX_TOLERANCE;
use crate::error::{ensure, Error, Result};

/// Per-strategy payoffs of one player (expected, focal-adjusted, ...).
pub type UtilityVector = Vec<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    name: String,
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    payoffs: Vec<f64>,
}

impl Game {
    /// Builds a game and rejects it unless [`Game::validate`] finds nothing wrong.
    pub fn new(
        name: impl Into<String>,
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        payoffs: Vec<f64>,
    ) -> Result<Self> {
        let game = Self::unchecked(name, players, strategies, payoffs);
        let report = game.validate();
        if report.is_ok() {
            Ok(game)
        } else {
            Err(Error::InvalidInput(report.to_string()))
        }
    }

    /// Builds a game without checking any invariant. Only [`Game::validate`] is safe to call
    /// on the result until it has been validated.
    pub fn unchecked(
        name: impl Into<String>,
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        payoffs: Vec<f64>,
    ) -> Self {
        Self {
            name: name.into(),
            players,
            strategies,
            payoffs,
        }
    }

    /// Builds a game by evaluating `payoff_fn` on every pure profile.
    pub fn from_fn<F>(
        name: impl Into<String>,
        players: Vec<String>,
        strategies: Vec<Vec<String>>,
        mut payoff_fn: F,
    ) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Vec<f64>,
    {
        let n = players.len();
        let counts: Vec<usize> = strategies.iter().map(Vec::len).collect();
        let cells: usize = counts.iter().product();
        let mut payoffs = Vec::with_capacity(cells * n);
        let mut profile = vec![0usize; counts.len()];
        for _ in 0..cells {
            let cell = payoff_fn(&profile);
            ensure!(
                cell.len() == n,
                InvalidInput,
                "payoff function returned {} values for {} players",
                cell.len(),
                n
            );
            payoffs.extend(cell);
            advance(&mut profile, &counts);
        }
        Self::new(name, players, strategies, payoffs)
    }

    /// Two-player game from a table of `(row payoff, column payoff)` cells.
    pub fn bimatrix(
        name: impl Into<String>,
        rows: &[&str],
        columns: &[&str],
        cells: &[&[(f64, f64)]],
    ) -> Result<Self> {
        ensure!(
            cells.len() == rows.len() && cells.iter().all(|r| r.len() == columns.len()),
            InvalidInput,
            "bimatrix table is not {}x{}",
            rows.len(),
            columns.len()
        );
        let payoffs = cells
            .iter()
            .flat_map(|row| row.iter().flat_map(|&(a, b)| [a, b]))
            .collect();
        Self::new(
            name,
            vec!["Row".to_string(), "Column".to_string()],
            vec![
                rows.iter().map(|s| s.to_string()).collect(),
                columns.iter().map(|s| s.to_string()).collect(),
            ],
            payoffs,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn strategies(&self, player: usize) -> &[String] {
        &self.strategies[player]
    }

    pub fn all_strategies(&self) -> &[Vec<String>] {
        &self.strategies
    }

    pub fn num_strategies(&self, player: usize) -> usize {
        self.strategies[player].len()
    }

    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    pub fn num_profiles(&self) -> usize {
        self.strategies.iter().map(Vec::len).product()
    }

    pub fn strategy_index(&self, player: usize, label: &str) -> Option<usize> {
        self.strategies.get(player)?.iter().position(|s| s == label)
    }

    /// Raw payoff buffer, profile-major then player.
    pub fn payoff_buffer(&self) -> &[f64] {
        &self.payoffs
    }

    /// Flat index of a pure profile in row-major order.
    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.strategies)
            .fold(0, |acc, (&s, labels)| acc * labels.len() + s)
    }

    /// Payoffs of every player at a pure profile.
    pub fn payoffs_at(&self, profile: &[usize]) -> &[f64] {
        let n = self.players.len();
        let start = self.profile_index(profile) * n;
        &self.payoffs[start..start + n]
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.payoffs_at(profile)[player]
    }

    /// Visits every pure profile in row-major order together with its payoff cell.
    pub fn for_each_profile(&self, mut f: impl FnMut(&[usize], &[f64])) {
        let n = self.players.len();
        if n == 0 {
            return;
        }
        let counts = self.strategy_counts();
        let mut profile = vec![0usize; n];
        for cell in self.payoffs.chunks_exact(n) {
            f(&profile, cell);
            advance(&mut profile, &counts);
        }
    }

    /// Visits every pure profile of the opponents of `player`, passing the profile (with the
    /// player's own slot set to 0) and the player's payoff for each of their strategies.
    pub fn for_each_opposing_profile(&self, player: usize, mut f: impl FnMut(&[usize], &[f64])) {
        let counts = self.strategy_counts();
        let mut opposing = counts.clone();
        opposing[player] = 1;
        let total: usize = opposing.iter().product();
        let mut profile = vec![0usize; counts.len()];
        let mut column = vec![0.0; counts[player]];
        for _ in 0..total {
            for (s, value) in column.iter_mut().enumerate() {
                profile[player] = s;
                *value = self.payoff(&profile, player);
            }
            profile[player] = 0;
            f(&profile, &column);
            advance(&mut profile, &opposing);
        }
    }

    /// Player's own payoffs with every other payoff left untouched, each shifted by `shift`.
    pub fn shift_payoffs(&self, player: usize, shift: f64) -> Game {
        let n = self.players.len();
        let mut out = self.clone();
        for cell in out.payoffs.chunks_exact_mut(n) {
            cell[player] += shift;
        }
        out
    }

    /// Structured report of every invariant violation.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let n = self.players.len();
        if n < 2 {
            issues.push(ValidationIssue::TooFewPlayers { found: n });
        }
        if self.strategies.len() != n {
            issues.push(ValidationIssue::StrategyListMismatch {
                players: n,
                strategy_lists: self.strategies.len(),
            });
        }
        for (player, labels) in self.strategies.iter().enumerate() {
            if labels.is_empty() {
                issues.push(ValidationIssue::EmptyStrategySet { player });
            }
            let mut seen = HashSet::new();
            for label in labels {
                if !seen.insert(label.as_str()) {
                    issues.push(ValidationIssue::DuplicateLabel {
                        player,
                        label: label.clone(),
                    });
                }
            }
        }
        let expected = self.num_profiles() * n;
        if self.payoffs.len() != expected {
            issues.push(ValidationIssue::PayoffSizeMismatch {
                expected,
                found: self.payoffs.len(),
            });
        }
        for (index, value) in self.payoffs.iter().enumerate() {
            if !value.is_finite() {
                issues.push(ValidationIssue::NonFinitePayoff {
                    cell: index / n.max(1),
                    player: index % n.max(1),
                    value: *value,
                });
            }
        }
        ValidationReport { issues }
    }
}

/// Odometer increment, last slot fastest.
pub(crate) fn advance(profile: &mut [usize], counts: &[usize]) {
    for k in (0..profile.len()).rev() {
        profile[k] += 1;
        if profile[k] < counts[k] {
            return;
        }
        profile[k] = 0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    TooFewPlayers { found: usize },
    StrategyListMismatch { players: usize, strategy_lists: usize },
    EmptyStrategySet { player: usize },
    DuplicateLabel { player: usize, label: String },
    PayoffSizeMismatch { expected: usize, found: usize },
    NonFinitePayoff { cell: usize, player: usize, value: f64 },
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TooFewPlayers { found } => write!(f, "need at least 2 players, found {found}"),
            Self::StrategyListMismatch {
                players,
                strategy_lists,
            } => write!(f, "{players} players but {strategy_lists} strategy lists"),
            Self::EmptyStrategySet { player } => write!(f, "player {player} has no strategies"),
            Self::DuplicateLabel { player, label } => {
                write!(f, "player {player} repeats strategy label `{label}`")
            }
            Self::PayoffSizeMismatch { expected, found } => {
                write!(f, "payoff tensor has {found} entries, expected {expected}")
            }
            Self::NonFinitePayoff {
                cell,
                player,
                value,
            } => write!(f, "payoff of player {player} in cell {cell} is {value}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// One probability vector per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct MixedProfile(Vec<Vec<f64>>);

impl MixedProfile {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        for (player, p) in vectors.iter().enumerate() {
            ensure!(!p.is_empty(), InvalidInput, "player {player} has an empty distribution");
            ensure!(
                p.iter().all(|&x| (0.0..=1.0).contains(&x)),
                InvalidInput,
                "player {player} has a probability outside [0, 1]: {p:?}"
            );
            let total: f64 = p.iter().sum();
            ensure!(
                (total - 1.0).abs() <= SIMPLEX_TOLERANCE * p.len() as f64,
                InvalidInput,
                "player {player} probabilities sum to {total}"
            );
        }
        Ok(Self(vectors))
    }

    /// Skips the simplex checks; for vectors that are simplex points by construction.
    pub(crate) fn from_vectors_unchecked(vectors: Vec<Vec<f64>>) -> Self {
        Self(vectors)
    }

    pub fn uniform(game: &Game) -> Self {
        Self(
            game.strategy_counts()
                .into_iter()
                .map(|j| vec![1.0 / j as f64; j])
                .collect(),
        )
    }

    pub fn pure(game: &Game, profile: &[usize]) -> Result<Self> {
        ensure!(
            profile.len() == game.num_players(),
            InvalidInput,
            "pure profile has {} entries for {} players",
            profile.len(),
            game.num_players()
        );
        let mut vectors = Vec::with_capacity(profile.len());
        for (player, &s) in profile.iter().enumerate() {
            let j = game.num_strategies(player);
            ensure!(s < j, InvalidInput, "strategy {s} out of range for player {player}");
            let mut p = vec![0.0; j];
            p[s] = 1.0;
            vectors.push(p);
        }
        Ok(Self(vectors))
    }

    pub fn player(&self, player: usize) -> &[f64] {
        &self.0[player]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn into_vectors(self) -> Vec<Vec<f64>> {
        self.0
    }

    pub fn num_players(&self) -> usize {
        self.0.len()
    }

    /// Replaces one player's vector, keeping the rest.
    pub fn with_player(&self, player: usize, p: Vec<f64>) -> Result<Self> {
        let mut vectors = self.0.clone();
        ensure!(player < vectors.len(), InvalidInput, "player {player} out of range");
        vectors[player] = p;
        Self::new(vectors)
    }

    /// Largest coordinate-wise gap to another profile of the same shape.
    pub fn sup_distance(&self, other: &MixedProfile) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        ensure!(
            self.0.len() == game.num_players(),
            InvalidInput,
            "profile has {} players, game has {}",
            self.0.len(),
            game.num_players()
        );
        for (player, p) in self.0.iter().enumerate() {
            ensure!(
                p.len() == game.num_strategies(player),
                InvalidInput,
                "player {player}: profile has {} strategies, game has {}",
                p.len(),
                game.num_strategies(player)
            );
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for MixedProfile {
    type Error = Error;

    fn try_from(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(vectors)
    }
}

impl From<MixedProfile> for Vec<Vec<f64>> {
    fn from(profile: MixedProfile) -> Self {
        profile.0
    }
}

fn check_player(game: &Game, player: usize) -> Result<()> {
    ensure!(
        player < game.num_players(),
        InvalidInput,
        "player {player} out of range for a {}-player game",
        game.num_players()
    );
    Ok(())
}

/// Expected payoff of each of `player`'s pure strategies against the others' mixtures.
pub fn expected_utilities(
    game: &Game,
    profile: &MixedProfile,
    player: usize,
) -> Result<UtilityVector> {
    check_player(game, player)?;
    profile.check_shape(game)?;
    let mut out = vec![0.0; game.num_strategies(player)];
    expected_utilities_into(game, profile, player, &mut out);
    Ok(out)
}

/// Shape-unchecked kernel behind [`expected_utilities`]; `out` must have length `J_player`.
pub(crate) fn expected_utilities_into(
    game: &Game,
    profile: &MixedProfile,
    player: usize,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|x| *x = 0.0);
    game.for_each_profile(|s, cell| {
        let mut weight = 1.0;
        for (k, &sk) in s.iter().enumerate() {
            if k != player {
                weight *= profile.0[k][sk];
            }
        }
        out[s[player]] += weight * cell[player];
    });
}

/// Expected payoff of `player` when everyone plays `profile`.
pub fn profile_payoff(game: &Game, profile: &MixedProfile, player: usize) -> Result<f64> {
    check_player(game, player)?;
    profile.check_shape(game)?;
    let mut total = 0.0;
    game.for_each_profile(|s, cell| {
        let weight: f64 = s.iter().enumerate().map(|(k, &sk)| profile.0[k][sk]).product();
        total += weight * cell[player];
    });
    Ok(total)
}

/// Replaces every payoff `x` by `x^gamma` (constant relative risk aversion).
///
/// Negative payoffs are only accepted when `gamma` is an integer; shift loss games first.
pub fn transform_payoffs(game: &Game, gamma: f64) -> Result<Game> {
    ensure!(
        gamma.is_finite() && gamma > 0.0,
        InvalidParameter,
        "CRRA exponent must be positive, got {gamma}"
    );
    if gamma == 1.0 {
        return Ok(game.clone());
    }
    let integral = gamma.fract() == 0.0;
    let mut payoffs = Vec::with_capacity(game.payoffs.len());
    for &x in &game.payoffs {
        ensure!(
            x >= 0.0 || integral,
            Domain,
            "payoff {x} is negative; x^{gamma} is undefined"
        );
        payoffs.push(x.powf(gamma));
    }
    Game::new(
        game.name.clone(),
        game.players.clone(),
        game.strategies.clone(),
        payoffs,
    )
}
