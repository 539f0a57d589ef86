//! The Braess network, where no deterministic online algorithm is
//! 4-competitive.
//!
//! Edges `s→a` and `b→t` cost 1 for one user and `k²` for two; `s→b` and
//! `a→t` cost `k` either way; `a→b` costs 1 either way. The three strategies
//! are the paths `s-a-t`, `s-b-t` and `s-a-b-t`.

use num_traits::Zero;

use crate::rational::{self, Rational};

const EDGES: usize = 5;
const SA: usize = 0;
const AT: usize = 1;
const SB: usize = 2;
const BT: usize = 3;
const AB: usize = 4;

/// Path names and edges.
pub const BRAESS_PATHS: [(&str, &[usize]); 3] = [("s-a-t", &[SA, AT]), ("s-b-t", &[SB, BT]), ("s-a-b-t", &[SA, AB, BT])];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BraessReport {
    pub k: u64,
    pub opt_one: Rational,
    pub opt_two: Rational,
    /// Decision trees examined: first path, then a reply to each first path.
    pub algorithms: usize,
    pub best_ratio: Rational,
    /// First path and the reply to it of one best algorithm.
    pub best_first: usize,
    pub best_reply: usize,
    /// `min{(k+1)/3, (k²+k+2)/(2k+2)}`, the value the search must reproduce.
    pub closed_form: Rational,
}

impl BraessReport {
    pub fn beats_four(&self) -> bool {
        self.best_ratio > rational::int(4)
    }
}

fn edge_cost(k: &Rational, e: usize, load: usize) -> Rational {
    match (e, load) {
        (_, 0) => Rational::zero(),
        (SA | BT, 1) => rational::one(),
        (SA | BT, _) => k * k,
        (SB | AT, _) => k.clone(),
        _ => rational::one(),
    }
}

fn cost(k: &Rational, paths: &[usize]) -> Rational {
    let mut load = [0usize; EDGES];
    for &p in paths {
        for &e in BRAESS_PATHS[p].1 {
            load[e] += 1;
        }
    }
    (0..EDGES).map(|e| edge_cost(k, e, load[e])).sum()
}

/// Exhausts every deterministic algorithm for two sequential arrivals.
pub fn braess_negative_test(k: u64) -> BraessReport {
    assert!(k >= 1, "k must be positive");
    let kr = rational::int(k as i64);
    let opt_one = (0..3).map(|p| cost(&kr, &[p])).min().expect("three paths");
    let opt_two = (0..3)
        .flat_map(|p| (0..3).map(move |q| (p, q)))
        .map(|(p, q)| cost(&kr, &[p, q]))
        .min()
        .expect("nine profiles");
    let mut best: Option<(Rational, usize, usize)> = None;
    let mut algorithms = 0;
    for first in 0..3 {
        // A decision tree also fixes replies to the two first moves it never
        // makes; those cannot affect its worst case, so each tree is scored
        // on its realised branch.
        for replies in 0..27usize {
            algorithms += 1;
            let reply = [replies % 3, replies / 3 % 3, replies / 9][first];
            let r1 = cost(&kr, &[first]) / &opt_one;
            let r2 = cost(&kr, &[first, reply]) / &opt_two;
            let worst = r1.max(r2);
            if best.as_ref().is_none_or(|(b, _, _)| worst < *b) {
                best = Some((worst, first, reply));
            }
        }
    }
    let (best_ratio, best_first, best_reply) = best.expect("some algorithm");
    let one = rational::one();
    let two = rational::int(2);
    let three = rational::int(3);
    let closed_form = ((&kr + &one) / &three).min((&kr * &kr + &kr + &two) / (&two * &kr + &two));
    BraessReport {
        k,
        opt_one,
        opt_two,
        algorithms,
        best_ratio,
        best_first,
        best_reply,
        closed_form,
    }
}
