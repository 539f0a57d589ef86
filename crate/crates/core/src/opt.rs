//! Exact offline optimum `OPT(q)` for every player count, by dynamic
//! programming over the decomposition tree, plus the cost-doubling
//! thresholds used by the online algorithm.

use thiserror::Error;

use crate::costfn::CostValue;
use crate::rational::{self, Rational};
use crate::spg::{LoadProfile, Network, Node};

/// Optimal cost and one optimal load profile for each `q = 0..=q_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptProfile {
    pub cost: Vec<CostValue>,
    pub loads: Vec<LoadProfile>,
}

impl OptProfile {
    pub fn q_max(&self) -> usize {
        self.cost.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OptError {
    #[error("requested horizon {requested} exceeds the cost-table horizon {horizon}")]
    Horizon { requested: usize, horizon: usize },
    #[error("cannot normalize: OPT(1) = {0}")]
    Normalization(CostValue),
}

/// Solves the optimum for `0..=q_max` players.
///
/// Parallel splits keep the smallest left load among optimal splits; the
/// optimal profiles are rebuilt top-down from those recorded splits.
pub fn solve(net: &Network, q_max: usize) -> Result<OptProfile, OptError> {
    if q_max > net.horizon() {
        return Err(OptError::Horizon {
            requested: q_max,
            horizon: net.horizon(),
        });
    }
    let tree = net.tree();
    let n = tree.num_components();
    let mut cost: Vec<Vec<CostValue>> = vec![Vec::new(); n];
    let mut split: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in (0..n).rev() {
        cost[c] = match tree.node(c) {
            Node::Edge(e) => net.cost_table(e).values()[..=q_max].to_vec(),
            Node::Series(l, r) => (0..=q_max).map(|q| &cost[l][q] + &cost[r][q]).collect(),
            Node::Parallel(l, r) => {
                let mut best = Vec::with_capacity(q_max + 1);
                let mut arg = Vec::with_capacity(q_max + 1);
                for q in 0..=q_max {
                    let mut best_q = CostValue::Unbounded;
                    let mut arg_q = 0;
                    for q1 in 0..=q {
                        let candidate = &cost[l][q1] + &cost[r][q - q1];
                        if q1 == 0 || candidate < best_q {
                            best_q = candidate;
                            arg_q = q1;
                        }
                    }
                    best.push(best_q);
                    arg.push(arg_q);
                }
                split[c] = arg;
                best
            }
        };
    }

    let loads = (0..=q_max)
        .map(|q| {
            let mut target = vec![0usize; n];
            target[0] = q;
            let mut out = LoadProfile::zeros(tree.num_edges());
            for c in 0..n {
                match tree.node(c) {
                    Node::Edge(e) => out.0[e] = target[c],
                    Node::Series(l, r) => {
                        target[l] = target[c];
                        target[r] = target[c];
                    }
                    Node::Parallel(l, r) => {
                        let left = split[c][target[c]];
                        target[l] = left;
                        target[r] = target[c] - left;
                    }
                }
            }
            out
        })
        .collect();

    Ok(OptProfile {
        cost: std::mem::take(&mut cost[0]),
        loads,
    })
}

/// Rescales all costs so that `OPT(1) = 1`. Returns the scaled network, the
/// scaled optimum and the factor that was applied.
pub fn normalize(net: &Network, opt: &OptProfile) -> Result<(Network, OptProfile, Rational), OptError> {
    let opt1 = opt.cost.get(1).cloned().unwrap_or(CostValue::Unbounded);
    let factor = match &opt1 {
        CostValue::Finite(r) if *r > rational::zero() => rational::one() / r,
        _ => return Err(OptError::Normalization(opt1)),
    };
    let scaled = OptProfile {
        cost: opt.cost.iter().map(|c| c.scale(&factor)).collect(),
        loads: opt.loads.clone(),
    };
    Ok((net.scale(&factor), scaled, factor))
}

/// The sequence `n_k = max{q : OPT(q) < 2^k}` (with `n_0 = max{q : OPT(q) = 0}`),
/// truncated to the solved horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdSeq {
    n: Vec<usize>,
}

impl ThresholdSeq {
    /// `n_k` for `k <= k_max()`.
    pub fn n(&self, k: usize) -> usize {
        self.n[k]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.n
    }

    /// Last index stored: the first `k` with `n_k = q_max`, or the first `k`
    /// after which no further threshold can grow (when `OPT` turns unbounded
    /// before `q_max`).
    pub fn k_max(&self) -> usize {
        self.n.len() - 1
    }

    /// Smallest `k` with `q <= n_k`, if any.
    pub fn first_covering(&self, q: usize) -> Option<usize> {
        self.n.iter().position(|&nk| q <= nk)
    }
}

/// Computes the thresholds for a normalized optimum.
pub fn thresholds(opt: &OptProfile) -> ThresholdSeq {
    let cost = &opt.cost;
    let q_max = cost.len() - 1;
    let last_finite = cost.iter().rposition(CostValue::is_finite).unwrap_or(0);
    let n0 = cost.iter().rposition(CostValue::is_zero).unwrap_or(0);
    let mut n = vec![n0];
    let mut k = 0u32;
    while n[n.len() - 1] < q_max {
        k += 1;
        let bound = CostValue::Finite(rational::pow2(k));
        let nk = cost.iter().rposition(|c| *c < bound).unwrap_or(0);
        n.push(nk);
        if nk == last_finite && nk < q_max {
            // OPT is unbounded past `nk`; no larger k can reach further.
            break;
        }
    }
    ThresholdSeq { n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::CostTable;
    use crate::rational::int;
    use crate::spg::SpgTree;

    pub(crate) fn cheap_then_steep() -> Network {
        Network::new(
            SpgTree::parse("P(e(top),e(bottom))").unwrap(),
            vec![
                CostTable::from_ints(&[0, 1, 1, 1, 1, 100]).unwrap(),
                CostTable::from_ints(&[0, 10, 10, 10, 10, 10]).unwrap(),
            ],
        )
    }

    fn costs(values: &[i64]) -> OptProfile {
        OptProfile {
            cost: values.iter().map(|&v| CostValue::int(v)).collect(),
            loads: vec![LoadProfile(vec![]); values.len()],
        }
    }

    #[test]
    fn parallel_split_is_optimal() {
        let net = Network::new(
            SpgTree::parse("P(e(a),e(b))").unwrap(),
            vec![
                CostTable::from_ints(&[0, 1, 100]).unwrap(),
                CostTable::from_ints(&[0, 10, 20]).unwrap(),
            ],
        );
        let opt = solve(&net, 2).unwrap();
        assert_eq!(opt.cost[2], CostValue::int(11));
        assert_eq!(opt.loads[2], LoadProfile(vec![1, 1]));
    }

    #[test]
    fn single_edge_optimum_is_its_table() {
        let net = Network::new(
            SpgTree::parse("e(x)").unwrap(),
            vec![CostTable::from_ints(&[0, 4, 9]).unwrap()],
        );
        let opt = solve(&net, 2).unwrap();
        assert_eq!(opt.cost, vec![CostValue::int(0), CostValue::int(4), CostValue::int(9)]);
        assert_eq!(opt.loads[2], LoadProfile(vec![2]));
    }

    #[test]
    fn optimum_switches_edges() {
        let opt = solve(&cheap_then_steep(), 5).unwrap();
        assert_eq!(opt.cost[4], CostValue::int(1));
        assert_eq!(opt.loads[4], LoadProfile(vec![4, 0]));
        assert_eq!(opt.cost[5], CostValue::int(10));
        assert_eq!(opt.loads[5], LoadProfile(vec![0, 5]));
    }

    #[test]
    fn ties_prefer_smallest_left_load() {
        let net = Network::new(
            SpgTree::parse("P(e(a),e(b))").unwrap(),
            vec![CostTable::from_ints(&[0, 3, 6]).unwrap(), CostTable::from_ints(&[0, 3, 6]).unwrap()],
        );
        let opt = solve(&net, 2).unwrap();
        assert_eq!(opt.loads[1], LoadProfile(vec![0, 1]));
        assert_eq!(opt.loads[2], LoadProfile(vec![0, 2]));
    }

    #[test]
    fn horizon_is_enforced() {
        assert_eq!(
            solve(&cheap_then_steep(), 6),
            Err(OptError::Horizon {
                requested: 6,
                horizon: 5
            })
        );
    }

    #[test]
    fn normalize_examples() {
        let net = Network::new(
            SpgTree::parse("e(x)").unwrap(),
            vec![CostTable::from_ints(&[0, 4, 9]).unwrap()],
        );
        let opt = solve(&net, 2).unwrap();
        let (scaled, nopt, factor) = normalize(&net, &opt).unwrap();
        assert_eq!(factor, crate::rational::ratio(1, 4));
        assert_eq!(nopt.cost[1], CostValue::int(1));
        assert_eq!(scaled.cost_table(0).at(2), &CostValue::Finite(crate::rational::ratio(9, 4)));

        let (_, same, one) = normalize(&cheap_then_steep(), &solve(&cheap_then_steep(), 5).unwrap()).unwrap();
        assert_eq!(one, int(1));
        assert_eq!(same, solve(&cheap_then_steep(), 5).unwrap());

        let free = Network::new(
            SpgTree::parse("e(x)").unwrap(),
            vec![CostTable::from_ints(&[0, 0, 3]).unwrap()],
        );
        assert_eq!(
            normalize(&free, &solve(&free, 2).unwrap()).unwrap_err(),
            OptError::Normalization(CostValue::int(0))
        );
    }

    #[test]
    fn threshold_examples() {
        let seq = thresholds(&costs(&[0, 1, 3, 5]));
        assert_eq!(seq.as_slice(), &[0, 1, 2, 3]);

        let fig = solve(&cheap_then_steep(), 5).unwrap();
        let seq = thresholds(&fig);
        assert_eq!(seq.as_slice(), &[0, 4, 4, 4, 5]);
        assert_eq!(seq.first_covering(5), Some(4));
        assert_eq!(seq.first_covering(3), Some(1));

        let seq = thresholds(&costs(&[0, 0, 0, 0, 2, 9]));
        assert_eq!(seq.n(0), 3);
    }

    #[test]
    fn thresholds_stop_when_optimum_becomes_unbounded() {
        let opt = OptProfile {
            cost: vec![CostValue::int(0), CostValue::int(1), CostValue::int(5), CostValue::Unbounded],
            loads: vec![LoadProfile(vec![]); 4],
        };
        let seq = thresholds(&opt);
        assert_eq!(seq.as_slice(), &[0, 1, 1, 2]);
        assert_eq!(seq.first_covering(3), None);
    }
}
