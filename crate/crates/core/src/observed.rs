//! Observed choice frequencies attached to a game.
//!
//! Individual frequencies may be missing (`None`) when a source reports only part of a player's
//! choice distribution. Missing entries are never imputed; operations that need them either
//! fail with [`Error::MissingData`] or work over every completion of the reported values.

use serde::{Deserialize, Serialize};

use crate::config::SIMPLEX_TOLERANCE;
use crate::error::{ensure, Error, Result};
use crate::game::{Game, MixedProfile};

/// Tolerance on the sum of reported frequencies; printed data is rounded to two decimals
/// but every bundled source sums to one at that precision.
const FREQUENCY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedPlay {
    frequencies: Vec<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    source: String,
}

impl ObservedPlay {
    pub fn new(frequencies: Vec<Vec<Option<f64>>>, source: impl Into<String>) -> Result<Self> {
        for (i, row) in frequencies.iter().enumerate() {
            ensure!(!row.is_empty(), InvalidInput, "player {i} has no frequencies");
            let mut total = 0.0;
            for (j, f) in row.iter().enumerate() {
                if let Some(f) = *f {
                    ensure!(
                        (0.0..=1.0).contains(&f),
                        InvalidInput,
                        "frequency {f} of player {i}, strategy {j} is outside [0, 1]"
                    );
                    total += f;
                }
            }
            let complete = row.iter().all(Option::is_some);
            if complete {
                ensure!(
                    (total - 1.0).abs() <= FREQUENCY_SUM_TOLERANCE.max(SIMPLEX_TOLERANCE * row.len() as f64),
                    InvalidInput,
                    "frequencies of player {i} sum to {total}, not 1"
                );
            } else {
                ensure!(
                    total <= 1.0 + FREQUENCY_SUM_TOLERANCE,
                    InvalidInput,
                    "reported frequencies of player {i} already sum to {total}"
                );
            }
        }
        Ok(Self {
            frequencies,
            counts: None,
            source: source.into(),
        })
    }

    /// Fully reported frequencies.
    pub fn complete(frequencies: Vec<Vec<f64>>, source: impl Into<String>) -> Result<Self> {
        Self::new(
            frequencies
                .into_iter()
                .map(|row| row.into_iter().map(Some).collect())
                .collect(),
            source,
        )
    }

    /// Frequencies derived from raw choice counts, which are kept alongside.
    pub fn from_counts(counts: Vec<Vec<u64>>, source: impl Into<String>) -> Result<Self> {
        let mut frequencies = Vec::with_capacity(counts.len());
        for (i, row) in counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            ensure!(total > 0, InvalidInput, "player {i} has no observations");
            frequencies.push(row.iter().map(|&c| c as f64 / total as f64).collect());
        }
        let mut obs = Self::complete(frequencies, source)?;
        obs.counts = Some(counts);
        Ok(obs)
    }

    pub fn from_profile(profile: &MixedProfile, source: impl Into<String>) -> Self {
        Self {
            frequencies: profile
                .vectors()
                .iter()
                .map(|v| v.iter().copied().map(Some).collect())
                .collect(),
            counts: None,
            source: source.into(),
        }
    }

    /// Attaches counts; each player's counts must have the same length as their frequencies.
    pub fn with_counts(mut self, counts: Vec<Vec<u64>>) -> Result<Self> {
        ensure!(
            counts.len() == self.frequencies.len()
                && counts.iter().zip(&self.frequencies).all(|(c, f)| c.len() == f.len()),
            InvalidInput,
            "counts do not match the frequency shape"
        );
        self.counts = Some(counts);
        Ok(self)
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn frequencies(&self) -> &[Vec<Option<f64>>] {
        &self.frequencies
    }

    pub fn counts(&self) -> Option<&[Vec<u64>]> {
        self.counts.as_deref()
    }

    /// Number of observations of `player`, when counts are known.
    pub fn sample_size(&self, player: usize) -> Option<u64> {
        self.counts.as_ref().map(|c| c[player].iter().sum())
    }

    pub fn num_players(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequency(&self, player: usize, strategy: usize) -> Option<f64> {
        self.frequencies.get(player)?.get(strategy).copied().flatten()
    }

    /// A reported frequency, or [`Error::MissingData`].
    pub fn require(&self, player: usize, strategy: usize) -> Result<f64> {
        self.frequency(player, strategy).ok_or_else(|| {
            Error::MissingData(format!(
                "frequency of player {player}, strategy {strategy} is not reported"
            ))
        })
    }

    pub fn is_complete_for(&self, player: usize) -> bool {
        self.frequencies[player].iter().all(Option::is_some)
    }

    pub fn is_complete(&self) -> bool {
        (0..self.num_players()).all(|i| self.is_complete_for(i))
    }

    pub fn player(&self, player: usize) -> Option<Vec<f64>> {
        self.frequencies[player].iter().copied().collect()
    }

    /// The frequencies as a mixed profile; every entry must be reported.
    pub fn to_profile(&self) -> Result<MixedProfile> {
        let vectors = (0..self.num_players())
            .map(|i| {
                self.player(i).ok_or_else(|| {
                    Error::MissingData(format!("frequencies of player {i} are incomplete"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MixedProfile::new(vectors)
    }

    /// Every completion of a player's frequencies that puts all unreported mass on one
    /// missing strategy. Complete players yield their single vector.
    pub fn extreme_completions(&self, player: usize) -> Vec<Vec<f64>> {
        let row = &self.frequencies[player];
        let missing: Vec<usize> = (0..row.len()).filter(|&j| row[j].is_none()).collect();
        let base: Vec<f64> = row.iter().map(|f| f.unwrap_or(0.0)).collect();
        if missing.is_empty() {
            return vec![base];
        }
        let rest = (1.0 - base.iter().sum::<f64>()).max(0.0);
        missing
            .iter()
            .map(|&j| {
                let mut v = base.clone();
                v[j] = rest;
                v
            })
            .collect()
    }

    pub fn check_shape(&self, game: &Game) -> Result<()> {
        ensure!(
            self.frequencies.len() == game.num_players(),
            InvalidInput,
            "observations cover {} players, game has {}",
            self.frequencies.len(),
            game.num_players()
        );
        for (i, row) in self.frequencies.iter().enumerate() {
            ensure!(
                row.len() == game.num_strategies(i),
                InvalidInput,
                "player {i}: {} frequencies for {} strategies",
                row.len(),
                game.num_strategies(i)
            );
        }
        Ok(())
    }
}
