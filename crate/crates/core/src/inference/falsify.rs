//! Frequency patterns that no equilibrium of a model class can produce.
//!
//! The games come in a family of 2x2 matching-pennies variants that differ only in the row
//! player's payoff at `(U, L)`; the column player's payoffs are identical across the family.
//! `p` is the column player's frequency of `L` and `q` the row player's frequency of `U`.
//! For the column player `u(L) - u(R)` falls as `q` rises, so any monotone quantal response
//! with `q <= q'` must have `p >= p'`; seeing `p < p'` instead rejects QRE.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ensure, Result};
use crate::observed::ObservedPlay;

/// One-sided two-proportion z-test of `p < p'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionTest {
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionVerdict {
    pub test: String,
    pub rejected: bool,
    /// The inequalities that fired, with the reasoning behind them; empty unless rejected.
    pub witness: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Present when every observation carries counts; one entry per adjacent `p` comparison.
    pub significance: Option<Vec<ProportionTest>>,
}

/// `(p, q)` of one observation: column frequency of its first strategy, row frequency of its first.
fn pq(obs: &ObservedPlay, index: usize) -> Result<(f64, f64)> {
    ensure!(
        obs.num_players() == 2
            && obs.frequencies().iter().all(|row| row.len() == 2)
            && obs.is_complete(),
        InvalidInput,
        "observation {index} is not a complete 2x2 observation"
    );
    Ok((obs.require(1, 0)?, obs.require(0, 0)?))
}

fn proportion_test(a: &ObservedPlay, b: &ObservedPlay) -> Option<ProportionTest> {
    let (na, nb) = (a.sample_size(1)? as f64, b.sample_size(1)? as f64);
    let xa = a.counts()?[1][0] as f64;
    let xb = b.counts()?[1][0] as f64;
    let pooled = (xa + xb) / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let z = if se > 0.0 { (xb / nb - xa / na) / se } else { 0.0 };
    let normal = Normal::standard();
    Some(ProportionTest {
        z,
        p_value: 1.0 - normal.cdf(z),
    })
}

fn significance(obs: &[&ObservedPlay]) -> Option<Vec<ProportionTest>> {
    obs.windows(2).map(|w| proportion_test(w[0], w[1])).collect()
}

/// Rejects QRE when `p < p'` and `q <= q'`.
pub fn reject_qre_pair(first: &ObservedPlay, second: &ObservedPlay) -> Result<RejectionVerdict> {
    let (p, q) = pq(first, 0)?;
    let (p2, q2) = pq(second, 1)?;
    let rejected = p < p2 && q <= q2;
    let witness = if rejected {
        vec![
            format!("p = {p} < p' = {p2}"),
            format!("q = {q} <= q' = {q2}"),
            "with q <= q' the column player's gain from L over R is at least as large in the \
             first game, so a monotone response requires p >= p'"
                .to_string(),
        ]
    } else {
        Vec::new()
    };
    Ok(RejectionVerdict {
        test: "qre_pair".to_string(),
        rejected,
        witness,
        p: vec![p, p2],
        q: vec![q, q2],
        significance: significance(&[first, second]),
    })
}

/// Rejects focal QRE when `q <= q' <= q'' <= q'''` and `p < p' < p'' < p'''`.
pub fn reject_focal_qre_quad(obs: [&ObservedPlay; 4]) -> Result<RejectionVerdict> {
    let mut p = Vec::with_capacity(4);
    let mut q = Vec::with_capacity(4);
    for (k, o) in obs.iter().enumerate() {
        let (pk, qk) = pq(o, k)?;
        p.push(pk);
        q.push(qk);
    }
    let q_chain = q.windows(2).all(|w| w[0] <= w[1]);
    let p_chain = p.windows(2).all(|w| w[0] < w[1]);
    let rejected = q_chain && p_chain;
    let witness = if rejected {
        vec![
            format!("q chain {q:?} is weakly increasing"),
            format!("p chain {p:?} is strictly increasing"),
            "a weakly rising q weakly shrinks the column player's gain from L, so each strict \
             rise in p needs a more L-favouring focal set; the bias has only three orderings \
             (favouring R, neutral, favouring L), too few for three strict rises"
                .to_string(),
        ]
    } else {
        Vec::new()
    };
    Ok(RejectionVerdict {
        test: "focal_qre_quad".to_string(),
        rejected,
        witness,
        p,
        q,
        significance: significance(&obs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(p: f64, q: f64) -> ObservedPlay {
        ObservedPlay::complete(vec![vec![q, 1.0 - q], vec![p, 1.0 - p]], "t").unwrap()
    }

    #[test]
    fn pair_examples() {
        assert!(reject_qre_pair(&obs(0.4, 0.3), &obs(0.5, 0.3)).unwrap().rejected);
        assert!(!reject_qre_pair(&obs(0.5, 0.3), &obs(0.4, 0.4)).unwrap().rejected);
        let same = reject_qre_pair(&obs(0.4, 0.3), &obs(0.4, 0.3)).unwrap();
        assert!(!same.rejected);
        assert!(same.witness.is_empty());
    }

    #[test]
    fn quad_examples() {
        let chain = |ps: [f64; 4], qs: [f64; 4]| {
            let o: Vec<_> = ps.iter().zip(&qs).map(|(&p, &q)| obs(p, q)).collect();
            reject_focal_qre_quad([&o[0], &o[1], &o[2], &o[3]]).unwrap().rejected
        };
        assert!(chain([0.1, 0.2, 0.3, 0.4], [0.3, 0.3, 0.4, 0.5]));
        assert!(!chain([0.1, 0.2, 0.2, 0.4], [0.3, 0.3, 0.4, 0.5]));
        assert!(!chain([0.1, 0.2, 0.3, 0.4], [0.3, 0.4, 0.35, 0.5]));
    }

    #[test]
    fn shape_is_checked() {
        let three = ObservedPlay::complete(vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5]], "t").unwrap();
        assert!(reject_qre_pair(&three, &obs(0.4, 0.3)).is_err());
    }

    #[test]
    fn z_test_with_counts() {
        let a = ObservedPlay::from_counts(vec![vec![30, 70], vec![40, 60]], "a").unwrap();
        let b = ObservedPlay::from_counts(vec![vec![30, 70], vec![60, 40]], "b").unwrap();
        let v = reject_qre_pair(&a, &b).unwrap();
        assert!(v.rejected);
        let t = &v.significance.unwrap()[0];
        assert!(t.z > 2.0 && t.p_value < 0.01);
        assert!(reject_qre_pair(&obs(0.4, 0.3), &obs(0.5, 0.3)).unwrap().significance.is_none());
    }
}
