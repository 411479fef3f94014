//! Bundled experimental games and parametric game generators.
//!
//! Payoffs and frequencies are stored exactly as originally reported (no unit conversion).
//! Where a source reports only part of a player's choice distribution the rest is left
//! missing rather than imputed. Each fixture may also carry the focal sets that regret-averse
//! focality predicts for it, as published alongside the data; their deltas are zero.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::focality::FocalSpec;
use crate::game::Game;
use crate::io::GameFile;
use crate::observed::ObservedPlay;

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub game: Game,
    pub observed: Option<ObservedPlay>,
    pub paper_focal: Option<FocalSpec>,
    pub citation: String,
}

impl Fixture {
    pub fn to_game_file(&self) -> GameFile {
        GameFile {
            game: self.game.clone(),
            observed: self.observed.clone(),
            focal: self.paper_focal.as_ref().map(|f| f.labels(&self.game)),
            delta: self.paper_focal.as_ref().map(|f| f.deltas().to_vec()),
        }
    }
}

/// Optional generator parameters: the traveler's dilemma transfer `t` and the effort cost `c`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixtureParams {
    pub t: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterInfo {
    pub name: &'static str,
    pub default: f64,
    pub range: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub citation: &'static str,
    pub parameters: Vec<ParameterInfo>,
}

const GOEREE_HOLT: &str = "Goeree and Holt (2001), Ten little treasures of game theory";
const HOLT_AD: &str = "Holt et al. (2022), bilateral attacker-defender experiments";
const SCHOTTER: &str = "Schotter, Weigelt and Wilson (1994), laboratory investigation of multiperson rationality";
const TEMPLATE: &str = "synthetic falsification template (no observations)";

struct Entry {
    name: &'static str,
    description: &'static str,
    citation: &'static str,
    parameter: Option<(&'static str, f64, &'static str)>,
}

const ENTRIES: &[Entry] = &[
    Entry { name: "gh-mp-sym", description: "symmetric matching pennies", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "gh-mp-asym1", description: "asymmetric matching pennies, row (U, L) payoff 32", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "gh-mp-asym2", description: "asymmetric matching pennies, row (U, L) payoff 4.4", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "falsify-g1", description: "matching pennies variant, row (U, L) payoff 10", citation: TEMPLATE, parameter: None },
    Entry { name: "falsify-g2", description: "matching pennies variant, row (U, L) payoff 12", citation: TEMPLATE, parameter: None },
    Entry { name: "falsify-g3", description: "matching pennies variant, row (U, L) payoff 14", citation: TEMPLATE, parameter: None },
    Entry { name: "falsify-g4", description: "matching pennies variant, row (U, L) payoff 16", citation: TEMPLATE, parameter: None },
    Entry { name: "ad-g4", description: "zero-sum attacker-defender, close payoffs", citation: HOLT_AD, parameter: None },
    Entry { name: "ad-g5", description: "zero-sum attacker-defender, spread payoffs at (D, L)", citation: HOLT_AD, parameter: None },
    Entry { name: "ad-g6", description: "zero-sum attacker-defender, spread payoffs at (D, L), row (U, L) -6", citation: HOLT_AD, parameter: None },
    Entry { name: "m1", description: "2x2 game with Nash equilibria (U, L) and (D, R)", citation: SCHOTTER, parameter: None },
    Entry { name: "coord-g1", description: "coordination with a secure outside option, Safe pays row 0", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "coord-g2", description: "coordination with a secure outside option, Safe pays row 40 after U", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "kreps-baseline", description: "Kreps game", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "kreps-shifted", description: "Kreps game with 30 added to every payoff", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "traveler", description: "traveler's dilemma on claims 180..300", citation: GOEREE_HOLT, parameter: Some(("T", 180.0, "T > 0")) },
    Entry { name: "traveler-180", description: "traveler's dilemma, T = 180", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "traveler-5", description: "traveler's dilemma, T = 5", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "min-effort", description: "minimum-effort coordination on efforts 110..170", citation: GOEREE_HOLT, parameter: Some(("c", 0.5, "0 < c < 1")) },
    Entry { name: "min-effort-high", description: "minimum-effort coordination, c = 0.9", citation: GOEREE_HOLT, parameter: None },
    Entry { name: "min-effort-low", description: "minimum-effort coordination, c = 0.1", citation: GOEREE_HOLT, parameter: None },
];

/// Names, citations and parameter schemas of every bundled fixture, in catalog order.
pub fn list_fixtures() -> Vec<FixtureInfo> {
    ENTRIES
        .iter()
        .map(|e| FixtureInfo {
            name: e.name,
            description: e.description,
            citation: e.citation,
            parameters: e
                .parameter
                .iter()
                .map(|&(name, default, range)| ParameterInfo { name, default, range })
                .collect(),
        })
        .collect()
}

/// The catalog as an aligned text table.
pub fn catalog_table(infos: &[FixtureInfo]) -> String {
    let params: Vec<String> = infos
        .iter()
        .map(|i| {
            i.parameters
                .iter()
                .map(|p| format!("{} (default {}, {})", p.name, p.default, p.range))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    let w_name = infos.iter().map(|i| i.name.len()).max().unwrap_or(0).max(4);
    let w_desc = infos.iter().map(|i| i.description.len()).max().unwrap_or(0).max(11);
    let w_par = params.iter().map(String::len).max().unwrap_or(0).max(10);
    let mut out = String::new();
    let _ = writeln!(out, "{:w_name$}  {:w_desc$}  {:w_par$}  source", "name", "description", "parameters");
    for (info, p) in infos.iter().zip(&params) {
        let p = if p.is_empty() { "-" } else { p.as_str() };
        let _ = writeln!(out, "{:w_name$}  {:w_desc$}  {:w_par$}  {}", info.name, info.description, p, info.citation);
    }
    out
}

/// A fixture with default parameters.
pub fn fixture(name: &str) -> Result<Fixture> {
    builtin(name, &FixtureParams::default())
}

/// A bundled fixture by name.
pub fn builtin(name: &str, params: &FixtureParams) -> Result<Fixture> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    let accepts = entry.parameter.map(|p| p.0);
    if params.t.is_some() {
        ensure!(accepts == Some("T"), InvalidParameter, "fixture `{name}` takes no parameter T");
    }
    if params.c.is_some() {
        ensure!(accepts == Some("c"), InvalidParameter, "fixture `{name}` takes no parameter c");
    }
    let citation = entry.citation.to_string();
    let mut fixture = match name {
        "gh-mp-sym" => pennies(name, 8.0, Some(([0.52, 0.48], [0.52, 0.48])), (&["U", "D"], &["L", "R"])),
        "gh-mp-asym1" => pennies(name, 32.0, Some(([0.96, 0.04], [0.16, 0.84])), (&["U"], &["L", "R"])),
        "gh-mp-asym2" => pennies(name, 4.4, Some(([0.08, 0.92], [0.8, 0.2])), (&["D"], &["L", "R"])),
        "falsify-g1" => pennies(name, 10.0, None, (&[], &[])),
        "falsify-g2" => pennies(name, 12.0, None, (&[], &[])),
        "falsify-g3" => pennies(name, 14.0, None, (&[], &[])),
        "falsify-g4" => pennies(name, 16.0, None, (&[], &[])),
        "ad-g4" => attacker_defender(name, [-3.0, -7.0, -6.0, -4.0], ([0.34, 0.66], [0.49, 0.51]), (&["U", "D"], &["L", "R"])),
        "ad-g5" => attacker_defender(name, [-2.0, -7.0, -8.0, -4.0], ([0.59, 0.41], [0.33, 0.67]), (&["U"], &["R"])),
        "ad-g6" => attacker_defender(name, [-6.0, -7.0, -12.0, -4.0], ([0.82, 0.18], [0.61, 0.39]), (&["U"], &["L"])),
        "m1" => m1(name),
        "coord-g1" => coordination(name, 0.0, [0.04, 0.96], 0.84, "D"),
        "coord-g2" => coordination(name, 40.0, [0.36, 0.64], 0.76, "U"),
        "kreps-baseline" => kreps(name, 0.0, [0.68, 0.32], [0.25, 0.08, 0.67, 0.0]),
        "kreps-shifted" => kreps(name, 30.0, [0.84, 0.16], [0.24, 0.12, 0.64, 0.0]),
        "traveler" => traveler_fixture(name, params.t.unwrap_or(180.0)),
        "traveler-180" => traveler_fixture(name, 180.0),
        "traveler-5" => traveler_fixture(name, 5.0),
        "min-effort" => effort_fixture(name, params.c.unwrap_or(0.5)),
        "min-effort-high" => effort_fixture(name, 0.9),
        "min-effort-low" => effort_fixture(name, 0.1),
        _ => unreachable!("every catalog entry has a builder"),
    }?;
    fixture.citation = citation;
    Ok(fixture)
}

fn labels(game: &Game, sets: (&[&str], &[&str])) -> Result<FocalSpec> {
    FocalSpec::from_labels(game, &[sets.0.to_vec(), sets.1.to_vec()], vec![0.0, 0.0])
}

fn finish(name: &str, game: Game, observed: Option<ObservedPlay>, focal: Option<FocalSpec>) -> Result<Fixture> {
    if let Some(o) = &observed {
        o.check_shape(&game)?;
    }
    Ok(Fixture {
        name: name.to_string(),
        game,
        observed,
        paper_focal: focal,
        citation: String::new(),
    })
}

fn pennies(
    name: &str,
    row_ul: f64,
    freqs: Option<([f64; 2], [f64; 2])>,
    focal: (&[&str], &[&str]),
) -> Result<Fixture> {
    let game = Game::bimatrix(
        name,
        &["U", "D"],
        &["L", "R"],
        &[&[(row_ul, 4.0), (4.0, 8.0)], &[(4.0, 8.0), (8.0, 4.0)]],
    )?;
    let observed = freqs
        .map(|(r, c)| ObservedPlay::complete(vec![r.to_vec(), c.to_vec()], name))
        .transpose()?;
    let focal = if freqs.is_some() { Some(labels(&game, focal)?) } else { None };
    finish(name, game, observed, focal)
}

/// Zero-sum 2x2 game from the row player's payoffs at (U,L), (U,R), (D,L), (D,R).
fn attacker_defender(
    name: &str,
    row: [f64; 4],
    freqs: ([f64; 2], [f64; 2]),
    focal: (&[&str], &[&str]),
) -> Result<Fixture> {
    let game = Game::bimatrix(
        name,
        &["U", "D"],
        &["L", "R"],
        &[&[(row[0], -row[0]), (row[1], -row[1])], &[(row[2], -row[2]), (row[3], -row[3])]],
    )?;
    let observed = ObservedPlay::complete(vec![freqs.0.to_vec(), freqs.1.to_vec()], name)?;
    let focal = labels(&game, focal)?;
    finish(name, game, Some(observed), Some(focal))
}

fn m1(name: &str) -> Result<Fixture> {
    let game = Game::bimatrix(
        name,
        &["U", "D"],
        &["L", "R"],
        &[&[(4.0, 4.0), (4.0, 4.0)], &[(0.0, 1.0), (6.0, 3.0)]],
    )?;
    let observed = ObservedPlay::complete(vec![vec![0.57, 0.43], vec![0.2, 0.8]], name)?;
    let focal = labels(&game, (&["U"], &["R"]))?;
    finish(name, game, Some(observed), Some(focal))
}

fn coordination(name: &str, safe_up: f64, row: [f64; 2], right: f64, row_focal: &str) -> Result<Fixture> {
    let game = Game::bimatrix(
        name,
        &["U", "D"],
        &["Left", "Right", "Safe"],
        &[
            &[(9.0, 9.0), (0.0, 0.0), (safe_up, 4.0)],
            &[(0.0, 0.0), (18.0, 18.0), (0.0, 4.0)],
        ],
    )?;
    let observed = ObservedPlay::new(
        vec![vec![Some(row[0]), Some(row[1])], vec![None, Some(right), None]],
        name,
    )?;
    let focal = labels(&game, (&[row_focal], &["Right"]))?;
    finish(name, game, Some(observed), Some(focal))
}

fn kreps(name: &str, shift: f64, row: [f64; 2], col: [f64; 4]) -> Result<Fixture> {
    let base = [
        [(20.0, 5.0), (0.0, 4.5), (1.0, 3.0), (2.0, -25.0)],
        [(0.0, -25.0), (1.0, -10.0), (3.0, 3.0), (5.0, 4.0)],
    ];
    let cells: Vec<Vec<(f64, f64)>> = base
        .iter()
        .map(|r| r.iter().map(|&(a, b)| (a + shift, b + shift)).collect())
        .collect();
    let cells: Vec<&[(f64, f64)]> = cells.iter().map(Vec::as_slice).collect();
    let game = Game::bimatrix(name, &["U", "D"], &["Left", "Middle", "Non-Nash", "Right"], &cells)?;
    let observed = ObservedPlay::complete(vec![row.to_vec(), col.to_vec()], name)?;
    let focal = labels(&game, (&["U"], &["Middle", "Non-Nash"]))?;
    finish(name, game, Some(observed), Some(focal))
}

fn grid_labels(lo: u32, hi: u32) -> Vec<String> {
    (lo..=hi).map(|v| v.to_string()).collect()
}

fn symmetric(name: &str, lo: u32, hi: u32, payoff: impl Fn(f64, f64) -> f64) -> Result<Game> {
    let strategies = vec![grid_labels(lo, hi), grid_labels(lo, hi)];
    Game::from_fn(
        name,
        vec!["Player 1".to_string(), "Player 2".to_string()],
        strategies,
        |s| {
            let a = (lo as usize + s[0]) as f64;
            let b = (lo as usize + s[1]) as f64;
            vec![payoff(a, b), payoff(b, a)]
        },
    )
}

/// Traveler's dilemma on integer claims 180..300: both receive the lower claim, and the lower
/// claimant additionally receives `t` from the higher one.
pub fn traveler_dilemma(t: f64) -> Result<Game> {
    ensure!(t > 0.0 && t.is_finite(), InvalidParameter, "traveler transfer T must be positive, got {t}");
    symmetric(&format!("traveler T={t}"), 180, 300, |own, other| {
        own.min(other) + t * sign(other - own)
    })
}

/// Minimum-effort game on integer efforts 110..170: payoff `min(e_i, e_j) - c * e_i`.
pub fn minimum_effort(c: f64) -> Result<Game> {
    ensure!(c > 0.0 && c < 1.0, InvalidParameter, "effort cost c must lie in (0, 1), got {c}");
    symmetric(&format!("min-effort c={c}"), 110, 170, |own, other| own.min(other) - c * own)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn range_spec(game: &Game, lo: usize, hi: usize) -> Result<FocalSpec> {
    let set: BTreeSet<usize> = (lo..=hi).collect();
    FocalSpec::new(vec![set.clone(), set], vec![0.0, 0.0]).and_then(|f| {
        f.check(game)?;
        Ok(f)
    })
}

fn traveler_fixture(name: &str, t: f64) -> Result<Fixture> {
    let game = traveler_dilemma(t)?.with_name(name);
    // Published focal ranges exist for the two experimental treatments only.
    let focal = if t == 180.0 {
        Some(range_spec(&game, 0, 0)?)
    } else if t == 5.0 {
        Some(range_spec(&game, 60, 120)?)
    } else {
        None
    };
    finish(name, game, None, focal)
}

fn effort_fixture(name: &str, c: f64) -> Result<Fixture> {
    let game = minimum_effort(c)?.with_name(name);
    let focal = if c == 0.9 {
        Some(range_spec(&game, 0, 30)?)
    } else if c == 0.1 {
        Some(range_spec(&game, 30, 60)?)
    } else {
        None
    };
    finish(name, game, None, focal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focality::regret_focal_set;

    #[test]
    fn catalog_builds_and_validates() {
        let infos = list_fixtures();
        assert!(infos.len() >= 12);
        for info in &infos {
            let f = fixture(info.name).unwrap();
            assert!(f.game.validate().is_ok(), "{}", info.name);
            assert_eq!(f.name, info.name);
        }
        let table = catalog_table(&infos);
        assert_eq!(table.lines().count(), infos.len() + 1);
    }

    #[test]
    fn unknown_and_misplaced_parameters() {
        assert!(matches!(fixture("nope"), Err(Error::UnknownFixture(_))));
        let t = FixtureParams { t: Some(5.0), c: None };
        assert!(builtin("m1", &t).is_err());
        assert!(builtin("traveler", &FixtureParams { t: Some(-1.0), c: None }).is_err());
        assert!(builtin("min-effort", &FixtureParams { t: None, c: Some(1.0) }).is_err());
    }

    #[test]
    fn asym1_observations() {
        let f = fixture("gh-mp-asym1").unwrap();
        let o = f.observed.unwrap();
        assert_eq!(o.player(0).unwrap(), vec![0.96, 0.04]);
        assert_eq!(o.player(1).unwrap(), vec![0.16, 0.84]);
    }

    #[test]
    fn traveler_payoffs() {
        let f = builtin("traveler", &FixtureParams { t: Some(5.0), c: None }).unwrap();
        let g = &f.game;
        let (a, b) = (g.strategy_index(0, "200").unwrap(), g.strategy_index(1, "250").unwrap());
        assert_eq!(g.payoffs_at(&[a, b]), &[205.0, 195.0]);
        assert_eq!(g.num_strategies(0), 121);
    }

    #[test]
    fn effort_payoffs() {
        let g = minimum_effort(0.9).unwrap();
        assert_eq!(g.num_strategies(0), 61);
        let (a, b) = (g.strategy_index(0, "150").unwrap(), g.strategy_index(1, "120").unwrap());
        let cell = g.payoffs_at(&[a, b]);
        assert!((cell[0] - (120.0 - 135.0)).abs() < 1e-12);
        assert!((cell[1] - (120.0 - 108.0)).abs() < 1e-12);
    }

    #[test]
    fn traveler_180_regrets_on_the_integer_grid() {
        // Claiming 181 risks 180 against a claim of 180; any claim of 182 or more risks 359
        // (the opponent undercuts by one: best reply earns m - 1 + 180, the claim earns m - 180).
        let f = fixture("traveler-180").unwrap();
        let r = crate::focality::regret_profile(&f.game, 0).unwrap();
        assert_eq!(r.regrets[0], 119.0);
        assert_eq!(r.regrets[1], 180.0);
        assert!(r.regrets[2..].iter().all(|&x| x == 359.0));
        assert_eq!(regret_focal_set(&f.game, 0, 1.0).unwrap(), BTreeSet::from([0, 1]));
        assert_eq!(f.paper_focal.unwrap().set(0), &BTreeSet::from([0]));
    }

    #[test]
    fn kreps_shift_is_uniform() {
        let base = fixture("kreps-baseline").unwrap().game;
        let shifted = fixture("kreps-shifted").unwrap().game;
        for (a, b) in base.payoff_buffer().iter().zip(shifted.payoff_buffer()) {
            assert_eq!(b - a, 30.0);
        }
        assert_eq!(shifted.payoff(&[0, 1], 1), 34.5);
    }

    #[test]
    fn published_focal_sets_match_regret_where_stated() {
        for name in ["gh-mp-sym", "gh-mp-asym1", "gh-mp-asym2", "m1", "traveler-5"] {
            let f = fixture(name).unwrap();
            let spec = f.paper_focal.unwrap();
            for i in 0..2 {
                if name.starts_with("gh-mp-asym") && i == 1 {
                    continue;
                }
                assert_eq!(&regret_focal_set(&f.game, i, 1.0).unwrap(), spec.set(i), "{name} player {i}");
            }
        }
    }
}
