//! Exact minimum Steiner trees by dynamic programming over terminal subsets.

use num_traits::Zero;

use super::graph::{MulticastInstance, VertexId};
use super::order::closure_mst;
use super::MulticastError;
use crate::rational::Rational;

/// Largest terminal set the exact solver accepts.
pub const STEINER_TERMINAL_CAP: usize = 12;

/// Minimum total weight of a connected subgraph spanning `terminals`.
pub fn steiner_opt(inst: &MulticastInstance, terminals: &[VertexId]) -> Result<Rational, MulticastError> {
    let mut terms = terminals.to_vec();
    terms.sort_unstable();
    terms.dedup();
    if terms.len() > STEINER_TERMINAL_CAP {
        return Err(MulticastError::TooManyTerminals {
            count: terms.len(),
            cap: STEINER_TERMINAL_CAP,
        });
    }
    if terms.len() <= 1 {
        return Ok(Rational::zero());
    }
    let closure = inst.metric_closure();
    let n = inst.num_vertices();
    // The last terminal is the root; subsets range over the others.
    let root = terms.pop().expect("at least two terminals");
    let k = terms.len();
    let full = (1usize << k) - 1;
    let mut dp: Vec<Vec<Rational>> = vec![Vec::new(); full + 1];
    for (i, &t) in terms.iter().enumerate() {
        dp[1 << i] = (0..n).map(|v| closure.dist(t, v).clone()).collect();
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let low = mask & mask.wrapping_neg();
        let mut joined: Vec<Rational> = Vec::with_capacity(n);
        for v in 0..n {
            let mut best: Option<Rational> = None;
            // Submasks holding the lowest bit, so each split is seen once.
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let a = sub | low;
                if a != mask {
                    let cand = &dp[a][v] + &dp[mask ^ a][v];
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            joined.push(best.expect("mask has a proper split"));
        }
        // One relaxation round suffices on a metric.
        let row = (0..n)
            .map(|v| {
                (0..n)
                    .map(|u| &joined[u] + closure.dist(u, v))
                    .min()
                    .expect("non-empty graph")
            })
            .collect();
        dp[mask] = row;
    }
    Ok(dp[full][root].clone())
}

/// Closure MST over the terminals: at most twice the Steiner optimum.
pub fn mst_approximation(inst: &MulticastInstance, terminals: &[VertexId]) -> Rational {
    let mut terms = terminals.to_vec();
    terms.sort_unstable();
    terms.dedup();
    closure_mst(inst, &terms).1
}

/// Exact optimum when the terminal count allows it, otherwise the MST bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SteinerValue {
    Exact(Rational),
    Approx(Rational),
}

impl SteinerValue {
    pub fn value(&self) -> &Rational {
        match self {
            SteinerValue::Exact(v) | SteinerValue::Approx(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, SteinerValue::Exact(_))
    }
}

pub fn steiner_or_approx(inst: &MulticastInstance, terminals: &[VertexId]) -> SteinerValue {
    match steiner_opt(inst, terminals) {
        Ok(v) => SteinerValue::Exact(v),
        Err(_) => SteinerValue::Approx(mst_approximation(inst, terminals)),
    }
}

/// `OPT` for the game: a Steiner tree over the source and the actual terminals.
pub fn game_opt(inst: &MulticastInstance) -> SteinerValue {
    let mut terms = vec![inst.source()];
    terms.extend_from_slice(inst.terminals());
    steiner_or_approx(inst, &terms)
}
