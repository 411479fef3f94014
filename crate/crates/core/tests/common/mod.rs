//! Game generators shared by the property suites.
#![allow(dead_code)]

use fqre::Game;
use proptest::collection::vec;
use proptest::prelude::*;

pub fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// Two-player game from row-major `(row, column)` payoff pairs.
pub fn bimatrix(rows: usize, cols: usize, payoffs: &[f64]) -> Game {
    let players = vec!["Row".to_string(), "Column".to_string()];
    Game::new("generated", players, vec![labels("r", rows), labels("c", cols)], payoffs.to_vec()).unwrap()
}

/// Integer payoffs in [-10, 10] on 2..=max by 2..=max strategies.
pub fn integer_bimatrix(max: usize) -> impl Strategy<Value = Game> {
    (2..=max, 2..=max).prop_flat_map(|(r, c)| {
        vec(-10i32..=10, r * c * 2).prop_map(move |p| bimatrix(r, c, &p.iter().map(|&x| x as f64).collect::<Vec<_>>()))
    })
}

/// Real payoffs in [0, 10] with the given shape.
pub fn real_bimatrix(rows: usize, cols: usize) -> impl Strategy<Value = Game> {
    vec(0.0f64..10.0, rows * cols * 2).prop_map(move |p| bimatrix(rows, cols, &p))
}

/// Game with 2..=3 players, 1..=4 strategies each, integer payoffs.
pub fn small_game() -> impl Strategy<Value = Game> {
    vec(1usize..=4, 2..=3).prop_flat_map(|counts| {
        let n = counts.len();
        let cells: usize = counts.iter().product();
        vec(-10i32..=10, cells * n).prop_map(move |p| {
            let players = labels("p", n);
            let strategies = counts.iter().enumerate().map(|(i, &j)| labels(&format!("s{i}_"), j)).collect();
            Game::new("generated", players, strategies, p.iter().map(|&x| x as f64).collect()).unwrap()
        })
    })
}

/// A probability vector of length `n` whose entries are multiples of 1/16, so sums of products
/// with small integers are exact in floating point.
pub fn dyadic_simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0u32..=16, n.saturating_sub(1)).prop_map(move |mut cuts| {
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(n);
        let mut prev = 0;
        for c in cuts {
            out.push((c - prev) as f64 / 16.0);
            prev = c;
        }
        out.push((16 - prev) as f64 / 16.0);
        out
    })
}

/// Interior probability vector of length `n`.
pub fn interior_simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.05f64..1.0, n).prop_map(|w| {
        let total: f64 = w.iter().sum();
        w.into_iter().map(|x| x / total).collect()
    })
}
