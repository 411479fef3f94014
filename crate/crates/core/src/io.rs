//! JSON game documents.
//!
//! ```json
//! {
//!   "name": "asymmetric pennies",
//!   "players": ["Row", "Column"],
//!   "strategies": [["U", "D"], ["L", "R"]],
//!   "payoffs": [[[32, 4], [4, 8]], [[4, 8], [8, 4]]],
//!   "observed": [[0.96, 0.04], [0.16, 0.84]],
//!   "focal": [["U"], []],
//!   "delta": [1.94, 0]
//! }
//! ```
//!
//! `payoffs` nests one level per player (indexed by that player's strategy) and ends with the
//! vector of payoffs to every player. Unreported observed frequencies are `null`. Reals are
//! written in shortest round-trip form, so saving and loading reproduces every `f64` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ensure, Error, Result};
use crate::focality::FocalSpec;
use crate::game::{advance, Game};
use crate::observed::ObservedPlay;

/// A game together with the optional observations and focal data stored beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct GameFile {
    pub game: Game,
    pub observed: Option<ObservedPlay>,
    pub focal: Option<Vec<Vec<String>>>,
    pub delta: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    name: String,
    players: Vec<String>,
    strategies: Vec<Vec<String>>,
    payoffs: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observed: Option<Vec<Vec<Option<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    focal: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Vec<f64>>,
}

impl GameFile {
    pub fn new(game: Game) -> Self {
        Self {
            game,
            observed: None,
            focal: None,
            delta: None,
        }
    }

    /// Focal spec from the stored labels; a missing `delta` means zero bias.
    pub fn focal_spec(&self) -> Result<Option<FocalSpec>> {
        let Some(labels) = &self.focal else {
            return Ok(None);
        };
        let deltas = self
            .delta
            .clone()
            .unwrap_or_else(|| vec![0.0; self.game.num_players()]);
        FocalSpec::from_labels(&self.game, labels, deltas).map(Some)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        let counts: Vec<usize> = doc.strategies.iter().map(Vec::len).collect();
        ensure!(
            doc.players.len() == counts.len(),
            Format,
            "{} players but {} strategy lists",
            doc.players.len(),
            counts.len()
        );
        ensure!(counts.iter().all(|&c| c > 0), Format, "empty strategy list");
        let payoffs = flatten_payoffs(&doc.payoffs, &counts)?;
        let game = Game::new(doc.name, doc.players, doc.strategies, payoffs)?;

        let observed = match doc.observed {
            Some(freqs) => {
                let mut obs = ObservedPlay::new(freqs, game.name())?;
                if let Some(c) = doc.counts {
                    obs = obs.with_counts(c)?;
                }
                obs.check_shape(&game)?;
                Some(obs)
            }
            None => {
                ensure!(doc.counts.is_none(), Format, "`counts` given without `observed`");
                None
            }
        };
        let file = Self {
            game,
            observed,
            focal: doc.focal,
            delta: doc.delta,
        };
        if let Some(delta) = &file.delta {
            ensure!(
                delta.len() == file.game.num_players(),
                Format,
                "`delta` has {} entries for {} players",
                delta.len(),
                file.game.num_players()
            );
        }
        file.focal_spec()?;
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Document {
            name: self.game.name().to_string(),
            players: self.game.players().to_vec(),
            strategies: self.game.all_strategies().to_vec(),
            payoffs: nest_payoffs(&self.game),
            observed: self.observed.as_ref().map(|o| o.frequencies().to_vec()),
            counts: self
                .observed
                .as_ref()
                .and_then(|o| o.counts().map(<[_]>::to_vec)),
            focal: self.focal.clone(),
            delta: self.delta.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn flatten_payoffs(value: &Value, counts: &[usize]) -> Result<Vec<f64>> {
    let n = counts.len();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total * n);
    let mut profile = vec![0; n];
    for _ in 0..total {
        let mut node = value;
        for (depth, &s) in profile.iter().enumerate() {
            let items = node
                .as_array()
                .ok_or_else(|| Error::Format(format!("payoffs: expected an array at depth {depth}")))?;
            ensure!(
                items.len() == counts[depth],
                Format,
                "payoffs: {} entries at depth {depth}, expected {}",
                items.len(),
                counts[depth]
            );
            node = &items[s];
        }
        let cell = node
            .as_array()
            .ok_or_else(|| Error::Format(format!("payoffs: expected a payoff vector at {profile:?}")))?;
        ensure!(
            cell.len() == n,
            Format,
            "payoffs: cell {profile:?} has {} entries for {n} players",
            cell.len()
        );
        for v in cell {
            out.push(
                v.as_f64()
                    .ok_or_else(|| Error::Format(format!("payoffs: non-numeric entry at {profile:?}")))?,
            );
        }
        advance(&mut profile, counts);
    }
    Ok(out)
}

fn nest_payoffs(game: &Game) -> Value {
    fn build(game: &Game, prefix: &mut Vec<usize>) -> Value {
        let depth = prefix.len();
        if depth == game.num_players() {
            return Value::Array(
                game.payoffs_at(prefix)
                    .iter()
                    .map(|&x| number(x))
                    .collect(),
            );
        }
        let mut items = Vec::with_capacity(game.num_strategies(depth));
        for s in 0..game.num_strategies(depth) {
            prefix.push(s);
            items.push(build(game, prefix));
            prefix.pop();
        }
        Value::Array(items)
    }
    build(game, &mut Vec::new())
}

/// Integral payoffs are written without a fractional part.
fn number(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        Value::from(x as i64)
    } else {
        Value::from(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "name": "g",
        "players": ["Row", "Column"],
        "strategies": [["U", "D"], ["L", "R"]],
        "payoffs": [[[32, 4], [4, 8]], [[4, 8], [8, 4.5]]],
        "observed": [[0.96, 0.04], [null, 0.84]],
        "focal": [["U"], []],
        "delta": [1.94, 0]
    }"#;

    #[test]
    fn parses_nested_payoffs() {
        let f = GameFile::from_json(DOC).unwrap();
        assert_eq!(f.game.payoff(&[0, 0], 0), 32.0);
        assert_eq!(f.game.payoff(&[1, 1], 1), 4.5);
        assert_eq!(f.game.payoff(&[0, 1], 1), 8.0);
        assert_eq!(f.observed.as_ref().unwrap().frequency(1, 0), None);
        let spec = f.focal_spec().unwrap().unwrap();
        assert!(spec.is_focal(0, 0));
        assert_eq!(spec.delta(0), 1.94);
    }

    #[test]
    fn round_trip_is_exact() {
        let f = GameFile::from_json(DOC).unwrap();
        let back = GameFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_malformed_documents() {
        let short = DOC.replace("[[4, 8], [8, 4.5]]", "[[4, 8]]");
        assert!(matches!(GameFile::from_json(&short), Err(Error::Format(_))));
        let bad_label = DOC.replace(r#"[["U"], []]"#, r#"[["Q"], []]"#);
        assert!(GameFile::from_json(&bad_label).is_err());
        assert!(matches!(GameFile::from_json("{"), Err(Error::Json(_))));
    }

    #[test]
    fn three_player_nesting() {
        let game = Game::from_fn(
            "three",
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec!["0".into(), "1".into()], vec!["0".into()], vec!["0".into(), "1".into(), "2".into()]],
            |s| vec![s[0] as f64, s[1] as f64 + 0.25, s[2] as f64 * 10.0],
        )
        .unwrap();
        let f = GameFile::new(game);
        let back = GameFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
