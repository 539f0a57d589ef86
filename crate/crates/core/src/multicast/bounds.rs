//! Prediction error of terminal-to-prediction assignments and the price of
//! anarchy bounds that depend on it.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::graph::{MulticastInstance, VertexId};
use super::MulticastError;
use crate::rational::{self, Rational};

/// Partial map from actual terminals to predictions (or the source).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionAssignment(pub BTreeMap<VertexId, VertexId>);

/// `(D, δ)` with `δ` split into unmatched terminals and unmatched predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionError {
    pub distance: Rational,
    pub unmatched_terminals: usize,
    pub unmatched_predictions: usize,
}

impl PredictionError {
    pub fn delta(&self) -> usize {
        self.unmatched_terminals + self.unmatched_predictions
    }
}

/// `0` for `x <= 1`, otherwise `ceil(log2 x) + 1`.
pub fn logterm(x: usize) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(rational::ceil_log2(x as u64)) + 1
    }
}

fn logterm_r(x: usize) -> Rational {
    rational::int(logterm(x) as i64)
}

/// Computes `(D, δ)` for an assignment.
pub fn error_of(inst: &MulticastInstance, eta: &PredictionAssignment) -> Result<PredictionError, MulticastError> {
    let mut distance = Rational::zero();
    let mut covered = std::collections::BTreeSet::new();
    for (&t, &h) in &eta.0 {
        if inst.terminals().binary_search(&t).is_err() {
            return Err(MulticastError::NotATerminal(inst.name(t).to_string()));
        }
        if h != inst.source() && inst.predictions().binary_search(&h).is_err() {
            return Err(MulticastError::NotAPrediction(inst.name(h).to_string()));
        }
        distance += inst.dist(t, h);
        if h != inst.source() {
            covered.insert(h);
        }
    }
    Ok(PredictionError {
        distance,
        unmatched_terminals: inst.terminals().len() - eta.0.len(),
        unmatched_predictions: inst.predictions().len() - covered.len(),
    })
}

/// Limits of the exact assignment search.
pub const EXACT_ASSIGNMENT_CAP: usize = 12;

/// Smallest `D` reachable for each `(δ_H, δ_R)` pair, with a witness.
///
/// The bounds only grow with `D`, so checking these entries covers every
/// assignment.
#[derive(Debug, Clone)]
pub struct AssignmentFrontier {
    entries: BTreeMap<(usize, usize), (Rational, PredictionAssignment)>,
}

impl AssignmentFrontier {
    /// Entries keyed by `(unmatched predictions, unmatched terminals)`.
    pub fn entries(&self) -> &BTreeMap<(usize, usize), (Rational, PredictionAssignment)> {
        &self.entries
    }

    pub fn errors(&self) -> impl Iterator<Item = (PredictionError, &PredictionAssignment)> {
        self.entries.iter().map(|(&(dh, dr), (d, eta))| {
            (
                PredictionError {
                    distance: d.clone(),
                    unmatched_terminals: dr,
                    unmatched_predictions: dh,
                },
                eta,
            )
        })
    }
}

/// Dynamic program over terminals with state (covered predictions,
/// unmatched terminals so far).
pub fn assignment_frontier(inst: &MulticastInstance) -> Result<AssignmentFrontier, MulticastError> {
    let r = inst.terminals();
    let h = inst.predictions();
    if r.len() > EXACT_ASSIGNMENT_CAP || h.len() > EXACT_ASSIGNMENT_CAP {
        return Err(MulticastError::TooManyTerminals {
            count: r.len().max(h.len()),
            cap: EXACT_ASSIGNMENT_CAP,
        });
    }
    let s = inst.source();
    let states = (1usize << h.len()) * (r.len() + 1);
    let index = |mask: usize, unmatched: usize| mask * (r.len() + 1) + unmatched;
    // Choice per terminal: None = unmatched, Some(s) or Some(h_j).
    type Cell = Option<(Rational, usize, Option<VertexId>)>;
    let mut layers: Vec<Vec<Cell>> = Vec::with_capacity(r.len() + 1);
    let mut first = vec![None; states];
    first[index(0, 0)] = Some((Rational::zero(), usize::MAX, None));
    layers.push(first);
    for &t in r {
        let prev = layers.last().expect("seeded");
        let mut next: Vec<Cell> = vec![None; states];
        let mut relax = |slot: usize, d: Rational, from: usize, choice: Option<VertexId>| {
            if next[slot].as_ref().is_none_or(|(cur, _, _)| d < *cur) {
                next[slot] = Some((d, from, choice));
            }
        };
        for mask in 0..1usize << h.len() {
            for unmatched in 0..=r.len() {
                let from = index(mask, unmatched);
                let Some((d, _, _)) = &prev[from] else { continue };
                if unmatched < r.len() {
                    relax(index(mask, unmatched + 1), d.clone(), from, None);
                }
                relax(index(mask, unmatched), d + inst.dist(t, s), from, Some(s));
                for (j, &p) in h.iter().enumerate() {
                    relax(index(mask | 1 << j, unmatched), d + inst.dist(t, p), from, Some(p));
                }
            }
        }
        layers.push(next);
    }
    let last = layers.last().expect("seeded");
    let mut entries = BTreeMap::new();
    for mask in 0..1usize << h.len() {
        for unmatched in 0..=r.len() {
            let slot = index(mask, unmatched);
            let Some((d, _, _)) = &last[slot] else { continue };
            let key = (h.len() - mask.count_ones() as usize, unmatched);
            if entries.get(&key).is_some_and(|(cur, _): &(Rational, _)| cur <= d) {
                continue;
            }
            let mut eta = BTreeMap::new();
            let mut at = slot;
            for depth in (1..=r.len()).rev() {
                let (_, from, choice) = layers[depth][at].clone().expect("reachable");
                if let Some(p) = choice {
                    eta.insert(r[depth - 1], p);
                }
                at = from;
            }
            entries.insert(key, (d.clone(), PredictionAssignment(eta)));
        }
    }
    Ok(AssignmentFrontier { entries })
}

/// The assignment minimizing `6D/OPT + logterm(δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestError {
    pub error: PredictionError,
    pub assignment: PredictionAssignment,
    pub objective: Rational,
    /// `false` when the instance was too large and nearest predictions were used.
    pub exact: bool,
}

fn objective(err: &PredictionError, opt: &Rational) -> Rational {
    let six = rational::int(6);
    let ratio = if opt.is_zero() {
        Rational::zero()
    } else {
        &(&six * &err.distance) / opt
    };
    ratio + logterm_r(err.delta())
}

/// Searches every assignment; ties prefer smaller `δ`, then smaller `D`.
pub fn best_error(inst: &MulticastInstance, opt: &Rational) -> BestError {
    match assignment_frontier(inst) {
        Ok(frontier) => {
            let (error, assignment) = frontier
                .errors()
                .min_by(|(a, _), (b, _)| {
                    objective(a, opt)
                        .cmp(&objective(b, opt))
                        .then(a.delta().cmp(&b.delta()))
                        .then(a.distance.cmp(&b.distance))
                })
                .map(|(e, eta)| (e, eta.clone()))
                .expect("the empty assignment always exists");
            BestError {
                objective: objective(&error, opt),
                error,
                assignment,
                exact: true,
            }
        }
        Err(_) => {
            let closure = inst.metric_closure();
            let mut points = vec![inst.source()];
            points.extend_from_slice(inst.predictions());
            let eta = PredictionAssignment(
                inst.terminals()
                    .iter()
                    .map(|&t| (t, closure.nearest(t, &points).expect("source present").0))
                    .collect(),
            );
            let error = error_of(inst, &eta).expect("nearest predictions are valid");
            BestError {
                objective: objective(&error, opt),
                error,
                assignment: eta,
                exact: false,
            }
        }
    }
}

/// One inequality `cost <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub bound: Rational,
    pub slack: Rational,
    pub holds: bool,
}

impl BoundCheck {
    fn new(cost: &Rational, bound: Rational) -> Self {
        let slack = &bound - cost;
        BoundCheck {
            holds: slack >= Rational::zero(),
            bound,
            slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub cost: Rational,
    pub opt: Rational,
    pub error: PredictionError,
    /// `cost <= 6D + 4·OPT`, only when every point is matched.
    pub known_set: Option<BoundCheck>,
    /// `cost <= 6D + 4·OPT + (logterm(δ_H) + logterm(δ_R))·OPT`; absent
    /// when there are no predictions.
    pub unknown_set: Option<BoundCheck>,
    /// As `unknown_set` with the log terms scaled by 4.
    pub unknown_set_relaxed: Option<BoundCheck>,
    /// `cost <= logterm(n)·OPT` with `n` counting the source's player.
    pub robustness: BoundCheck,
}

impl BoundReport {
    /// The known-set and robustness checks, plus the unknown-set check.
    pub fn all_hold(&self) -> bool {
        self.known_set.as_ref().is_none_or(|b| b.holds)
            && self.unknown_set.as_ref().is_none_or(|b| b.holds)
            && self.robustness.holds
    }
}

/// Evaluates the bounds for an equilibrium of cost `cost`.
pub fn bound_check(inst: &MulticastInstance, cost: &Rational, opt: &Rational, error: &PredictionError) -> BoundReport {
    let six_d = rational::int(6) * &error.distance;
    let four_opt = rational::int(4) * opt;
    let base = &six_d + &four_opt;
    let known_set = (error.delta() == 0).then(|| BoundCheck::new(cost, base.clone()));
    let logs = (logterm_r(error.unmatched_predictions) + logterm_r(error.unmatched_terminals)) * opt;
    let has_predictions = !inst.predictions().is_empty();
    let unknown_set = has_predictions.then(|| BoundCheck::new(cost, &base + &logs));
    let unknown_set_relaxed = has_predictions.then(|| BoundCheck::new(cost, &base + &(rational::int(4) * &logs)));
    let players = inst.terminals().len() + 1;
    let robustness = BoundCheck::new(cost, logterm_r(players) * opt);
    BoundReport {
        cost: cost.clone(),
        opt: opt.clone(),
        error: error.clone(),
        known_set,
        unknown_set,
        unknown_set_relaxed,
        robustness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicast::graph::WeightedEdge;
    use crate::rational::int;

    fn graph(n: usize, edges: &[(usize, usize, i64)], r: &[usize], h: &[usize]) -> MulticastInstance {
        let names = (0..n).map(|i| if i == 0 { "s".into() } else { format!("v{i}") }).collect();
        let edges = edges
            .iter()
            .map(|&(u, v, w)| WeightedEdge { u, v, weight: int(w) })
            .collect();
        MulticastInstance::new(names, edges, 0, r, h).unwrap()
    }

    fn eta(pairs: &[(usize, usize)]) -> PredictionAssignment {
        PredictionAssignment(pairs.iter().copied().collect())
    }

    /// Every assignment, by trying each choice per terminal.
    fn all_assignments(inst: &MulticastInstance) -> Vec<PredictionAssignment> {
        let mut choices: Vec<Option<usize>> = vec![None, Some(inst.source())];
        choices.extend(inst.predictions().iter().map(|&h| Some(h)));
        let mut out = vec![PredictionAssignment::default()];
        for &t in inst.terminals() {
            out = out
                .into_iter()
                .flat_map(|a| {
                    choices.iter().map(move |c| {
                        let mut a = a.clone();
                        if let Some(h) = c {
                            a.0.insert(t, *h);
                        }
                        a
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn logterm_values() {
        assert_eq!([0, 1, 2, 3, 4, 5, 8, 9].map(logterm), [0, 0, 2, 3, 3, 4, 4, 5]);
    }

    #[test]
    fn error_examples() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[1, 2], &[1, 2]);
        let perfect = error_of(&g, &eta(&[(1, 1), (2, 2)])).unwrap();
        assert_eq!((perfect.distance.clone(), perfect.delta()), (int(0), 0));

        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[2], &[1]);
        let off = error_of(&g, &eta(&[(2, 1)])).unwrap();
        assert_eq!((off.distance.clone(), off.delta()), (int(1), 0));
        let empty = error_of(&g, &eta(&[])).unwrap();
        assert_eq!((empty.distance.clone(), empty.delta()), (int(0), 2));
        assert!(matches!(error_of(&g, &eta(&[(1, 1)])), Err(MulticastError::NotATerminal(_))));
        assert!(matches!(error_of(&g, &eta(&[(2, 2)])), Err(MulticastError::NotAPrediction(_))));
    }

    #[test]
    fn frontier_matches_enumeration() {
        let g = graph(
            6,
            &[(0, 1, 2), (1, 2, 3), (2, 3, 1), (0, 4, 5), (4, 5, 2), (3, 5, 4)],
            &[2, 3, 5],
            &[1, 4],
        );
        let frontier = assignment_frontier(&g).unwrap();
        let mut brute: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for a in all_assignments(&g) {
            let e = error_of(&g, &a).unwrap();
            let key = (e.unmatched_predictions, e.unmatched_terminals);
            let slot = brute.entry(key).or_insert_with(|| e.distance.clone());
            if e.distance < *slot {
                *slot = e.distance.clone();
            }
        }
        assert_eq!(frontier.entries().len(), brute.len());
        for (key, (d, witness)) in frontier.entries() {
            assert_eq!(&brute[key], d);
            let e = error_of(&g, witness).unwrap();
            assert_eq!((e.unmatched_predictions, e.unmatched_terminals), *key);
            assert_eq!(&e.distance, d);
        }
    }

    #[test]
    fn best_error_examples() {
        // R = H: the identity is free.
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[1, 2], &[1, 2]);
        let best = best_error(&g, &int(2));
        assert_eq!((best.error.distance.clone(), best.error.delta()), (int(0), 0));
        assert_eq!(best.assignment, eta(&[(1, 1), (2, 2)]));

        // Equal sizes: the minimum-weight matching is found.
        let g = graph(5, &[(0, 1, 1), (1, 2, 1), (0, 3, 1), (3, 4, 1)], &[2, 4], &[1, 3]);
        let best = best_error(&g, &int(4));
        assert_eq!(best.error.distance, int(2));
        assert_eq!(best.error.delta(), 0);

        // A far terminal is cheaper to leave unmatched.
        let g = graph(4, &[(0, 1, 1), (0, 2, 1), (2, 3, 100)], &[1, 3], &[1]);
        let opt = int(102);
        let best = best_error(&g, &opt);
        assert_eq!(best.assignment, eta(&[(1, 1)]));
        assert_eq!(best.error.delta(), 1);
        assert_eq!(best.objective, int(0));
        let matched = error_of(&g, &eta(&[(1, 1), (3, 0)])).unwrap();
        assert!(objective(&matched, &opt) > best.objective);
    }

    #[test]
    fn bound_report_examples() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[2], &[1]);
        let err = error_of(&g, &eta(&[(2, 1)])).unwrap();
        let report = bound_check(&g, &int(2), &int(2), &err);
        let known = report.known_set.clone().unwrap();
        assert_eq!(known.bound, int(14));
        assert_eq!(known.slack, int(12));
        assert!(report.all_hold());
        assert_eq!(report.robustness.bound, int(4));

        let none = graph(3, &[(0, 1, 1), (1, 2, 1)], &[2], &[]);
        let err = error_of(&none, &eta(&[])).unwrap();
        let report = bound_check(&none, &int(2), &int(2), &err);
        assert!(report.known_set.is_none() && report.unknown_set.is_none());
        assert!(report.robustness.holds);
    }
}
