//! Prediction-augmented cost sharing on series-parallel networks.
//!
//! The mechanism simulates [`GoWithTheFlow`] for the predicted number of
//! players `n̂`, which fixes a target load `ℓ̂_e` per edge. Load beyond the
//! target is penalized: every extra unit on edge `e` adds at least `W_e` to
//! the modified cost `ĉ_e`. The `W` constants are spread over the
//! decomposition so that every source-sink path of a component `C` sums to
//! `W_C`. The modified costs are then shared with the ordered protocol.

use crate::costfn::CostValue;
use crate::eps::EpsCost;
use crate::gwtf::{GoWithTheFlow, GwtfError};
use crate::rational::{self, Rational};
use crate::spg::{ComponentId, EdgeIdx, LoadProfile, Network, Node, Path};

/// A global priority order over players `0..n`; earlier means higher priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Priority {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl Priority {
    pub fn identity(n: usize) -> Self {
        Priority {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    /// `order[r]` is the player with rank `r`. Must be a permutation of `0..n`.
    pub fn from_order(order: Vec<usize>) -> Self {
        let mut rank = vec![usize::MAX; order.len()];
        for (r, &p) in order.iter().enumerate() {
            assert!(p < order.len() && rank[p] == usize::MAX, "priority order must be a permutation");
            rank[p] = r;
        }
        Priority { order, rank }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Players from highest to lowest priority.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn rank(&self, player: usize) -> usize {
        self.rank[player]
    }
}

/// Penalty constants and the resulting modified cost tables for one `n̂`.
#[derive(Debug, Clone)]
pub struct PenaltyWeights {
    n_hat: usize,
    w: Vec<EpsCost>,
    thresholds: LoadProfile,
    component_thresholds: Vec<usize>,
    modified: Vec<Vec<EpsCost>>,
    marginal: Vec<Vec<EpsCost>>,
}

/// Builds the penalty weights from `A(n̂)`.
///
/// `W_root = c(A(n̂)) + ε`; parallel children inherit their parent's weight;
/// series children split it in proportion to their share of `c(A_C(n̂))`,
/// or equally when that cost is zero.
pub fn build_weights(alg: &GoWithTheFlow, n_hat: usize) -> Result<PenaltyWeights, GwtfError> {
    let net = alg.network();
    let tree = net.tree();
    let allocation = alg.run(n_hat)?;
    let loads = allocation.loads;

    let mut w = vec![EpsCost::zero(); tree.num_components()];
    w[tree.root()] = EpsCost::new(net.cost(&loads), rational::one());
    for c in 0..tree.num_components() {
        match tree.node(c) {
            Node::Edge(_) => {}
            Node::Parallel(l, r) => {
                w[l] = w[c].clone();
                w[r] = w[c].clone();
            }
            Node::Series(l, r) => {
                let total = finite(&net.component_cost(&loads, c));
                for child in [l, r] {
                    let share = if total == rational::zero() {
                        rational::ratio(1, 2)
                    } else {
                        finite(&net.component_cost(&loads, child)) / &total
                    };
                    w[child] = &w[c] * &share;
                }
            }
        }
    }

    let component_thresholds = tree
        .component_loads(&loads)
        .expect("online allocations are consistent");
    let horizon = net.horizon();
    let mut modified = Vec::with_capacity(tree.num_edges());
    let mut marginal = Vec::with_capacity(tree.num_edges());
    for e in 0..tree.num_edges() {
        let table = net.cost_table(e);
        let w_e = &w[tree.edge_component(e)];
        let mut values: Vec<EpsCost> = Vec::with_capacity(horizon + 1);
        for load in 0..=horizon {
            let base = EpsCost::from(table.at(load).clone());
            let value = if load <= loads.get(e) {
                base
            } else {
                (&values[load - 1] + w_e).max(base)
            };
            values.push(value);
        }
        marginal.push(values.windows(2).map(|p| p[1].marginal_over(&p[0])).collect());
        modified.push(values);
    }

    Ok(PenaltyWeights {
        n_hat,
        w,
        thresholds: loads,
        component_thresholds,
        modified,
        marginal,
    })
}

fn finite(value: &CostValue) -> Rational {
    value
        .finite()
        .cloned()
        .expect("the online allocation only uses finite-cost loads")
}

impl PenaltyWeights {
    pub fn n_hat(&self) -> usize {
        self.n_hat
    }

    /// `W_C` for every component.
    pub fn weight(&self, c: ComponentId) -> &EpsCost {
        &self.w[c]
    }

    /// `ℓ̂_e`, the load of `A(n̂)`.
    pub fn thresholds(&self) -> &LoadProfile {
        &self.thresholds
    }

    /// `ℓ̂_C` for every component.
    pub fn component_thresholds(&self) -> &[usize] {
        &self.component_thresholds
    }

    /// `ĉ_e(load)`, or `None` past the network horizon.
    pub fn modified_cost(&self, e: EdgeIdx, load: usize) -> Option<&EpsCost> {
        self.modified[e].get(load)
    }

    /// `ĉ_e(load + 1) - ĉ_e(load)`: what the next user in priority order pays.
    pub fn marginal(&self, e: EdgeIdx, load: usize) -> &EpsCost {
        &self.marginal[e][load]
    }

    /// Charge of a player whose predecessors put `prefix[e]` load on each edge.
    pub fn path_charge(&self, path: &Path, prefix: &[usize]) -> EpsCost {
        path.edges().iter().map(|&e| self.marginal(e, prefix[e])).sum()
    }

    /// Modified social cost `Σ_e ĉ_e(ℓ_e)`.
    pub fn modified_social_cost(&self, loads: &LoadProfile) -> EpsCost {
        loads
            .as_slice()
            .iter()
            .enumerate()
            .map(|(e, &l)| &self.modified[e][l])
            .sum()
    }

    /// Ordered-protocol charge of `player` under the given profile.
    pub fn charge(&self, paths: &[Path], priority: &Priority, player: usize) -> EpsCost {
        let rank = priority.rank(player);
        let mut prefix = vec![0usize; self.thresholds.as_slice().len()];
        for &other in &priority.order()[..rank] {
            for &e in paths[other].edges() {
                prefix[e] += 1;
            }
        }
        self.path_charge(&paths[player], &prefix)
    }

    /// Charges of every player, computed in one pass over the priority order.
    pub fn charges(&self, paths: &[Path], priority: &Priority) -> Vec<EpsCost> {
        let mut prefix = vec![0usize; self.thresholds.as_slice().len()];
        let mut out = vec![EpsCost::zero(); paths.len()];
        for &player in priority.order() {
            out[player] = self.path_charge(&paths[player], &prefix);
            for &e in paths[player].edges() {
                prefix[e] += 1;
            }
        }
        out
    }

    /// Per-edge charges of every player: `(edge, charge)` along its path.
    pub fn edge_charges(&self, paths: &[Path], priority: &Priority) -> Vec<Vec<(EdgeIdx, EpsCost)>> {
        let mut prefix = vec![0usize; self.thresholds.as_slice().len()];
        let mut out = vec![Vec::new(); paths.len()];
        for &player in priority.order() {
            out[player] = paths[player]
                .edges()
                .iter()
                .map(|&e| (e, self.marginal(e, prefix[e]).clone()))
                .collect();
            for &e in paths[player].edges() {
                prefix[e] += 1;
            }
        }
        out
    }
}

/// Convenience: weights straight from a network and a prediction.
pub fn weights_for(net: &Network, n_hat: usize) -> Result<(GoWithTheFlow, PenaltyWeights), GwtfError> {
    let alg = GoWithTheFlow::new(net)?;
    let weights = build_weights(&alg, n_hat)?;
    Ok((alg, weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costfn::CostTable;
    use crate::rational::ratio;
    use crate::spg::SpgTree;

    fn cheap_then_steep() -> Network {
        Network::new(
            SpgTree::parse("P(e(top),e(bottom))").unwrap(),
            vec![
                CostTable::from_ints(&[0, 1, 1, 1, 1, 100]).unwrap(),
                CostTable::from_ints(&[0, 10, 10, 10, 10, 10]).unwrap(),
            ],
        )
    }

    #[test]
    fn series_split_is_proportional() {
        // One player: A(1) takes both edges, with costs 3 and 1.
        let net = Network::new(
            SpgTree::parse("S(e(a),e(b))").unwrap(),
            vec![CostTable::from_ints(&[0, 3, 6]).unwrap(), CostTable::from_ints(&[0, 1, 2]).unwrap()],
        );
        let (_, w) = weights_for(&net, 1).unwrap();
        assert_eq!(w.weight(0), &EpsCost::ints(4, 1));
        assert_eq!(w.weight(1), &EpsCost::new(CostValue::int(3), ratio(3, 4)));
        assert_eq!(w.weight(2), &EpsCost::new(CostValue::int(1), ratio(1, 4)));
        assert_eq!(w.weight(1) + w.weight(2), w.weight(0).clone());
    }

    #[test]
    fn parallel_link_weights_are_copied() {
        let (_, w) = weights_for(&cheap_then_steep(), 5).unwrap();
        assert_eq!(w.weight(0), &EpsCost::ints(11, 1));
        assert_eq!(w.weight(1), &EpsCost::ints(11, 1));
        assert_eq!(w.weight(2), &EpsCost::ints(11, 1));
        assert_eq!(w.thresholds(), &LoadProfile(vec![4, 1]));
    }

    #[test]
    fn single_edge_weight() {
        let net = Network::new(
            SpgTree::parse("e(x)").unwrap(),
            vec![CostTable::from_ints(&[0, 2, 5, 9]).unwrap()],
        );
        let (_, w) = weights_for(&net, 2).unwrap();
        assert_eq!(w.weight(0), &EpsCost::ints(5, 1));
    }

    #[test]
    fn zero_cost_series_split_is_even() {
        // n̂ = 0 gives an empty allocation: W_root = ε, split evenly.
        let net = Network::new(
            SpgTree::parse("S(e(a),e(b))").unwrap(),
            vec![CostTable::from_ints(&[0, 3]).unwrap(), CostTable::from_ints(&[0, 1]).unwrap()],
        );
        let (_, w) = weights_for(&net, 0).unwrap();
        assert_eq!(w.weight(0), &EpsCost::ints(0, 1));
        assert_eq!(w.weight(1), &EpsCost::new(CostValue::int(0), ratio(1, 2)));
        assert_eq!(w.weight(2), &EpsCost::new(CostValue::int(0), ratio(1, 2)));
    }

    #[test]
    fn modified_cost_examples() {
        let (_, w) = weights_for(&cheap_then_steep(), 5).unwrap();
        // Top edge, ℓ̂ = 4: ĉ(5) = max{1 + (11 + ε), 100} = 100.
        assert_eq!(w.modified_cost(0, 5), Some(&EpsCost::ints(100, 0)));
        // Bottom edge, ℓ̂ = 1: ĉ(2) = max{10 + (11 + ε), 10} = 21 + ε.
        assert_eq!(w.modified_cost(1, 2), Some(&EpsCost::ints(21, 1)));
        assert_eq!(w.modified_cost(1, 3), Some(&EpsCost::ints(32, 2)));
        for load in 0..=4 {
            assert_eq!(
                w.modified_cost(0, load),
                Some(&EpsCost::from(cheap_then_steep().cost_table(0).at(load).clone()))
            );
        }
        assert_eq!(w.modified_cost(0, 6), None);
    }

    #[test]
    fn ordered_protocol_charges() {
        let net = Network::new(
            SpgTree::parse("P(e(a),e(b))").unwrap(),
            vec![CostTable::from_ints(&[0, 5, 7]).unwrap(), CostTable::from_ints(&[0, 5, 7]).unwrap()],
        );
        let (_, w) = weights_for(&net, 2).unwrap();
        // Optimal ties keep the left load smallest, so A(2) puts both players on b.
        let paths = vec![Path(vec![1]), Path(vec![1])];
        let priority = Priority::identity(2);
        assert_eq!(w.charge(&paths, &priority, 0), EpsCost::ints(5, 0));
        assert_eq!(w.charge(&paths, &priority, 1), EpsCost::ints(2, 0));
        assert_eq!(w.charges(&paths, &priority).iter().sum::<EpsCost>(), EpsCost::ints(7, 0));

        let reversed = Priority::from_order(vec![1, 0]);
        assert_eq!(w.charges(&paths, &reversed), vec![EpsCost::ints(2, 0), EpsCost::ints(5, 0)]);
    }

    #[test]
    fn fifth_user_of_top_edge_pays_more_than_penalty() {
        let (_, w) = weights_for(&cheap_then_steep(), 5).unwrap();
        let paths = vec![Path(vec![0]); 5];
        let charge = w.charge(&paths, &Priority::identity(5), 4);
        assert_eq!(charge, EpsCost::ints(99, 0));
        assert!(charge > *w.weight(1));
    }

    #[test]
    fn empty_path_is_free() {
        let (_, w) = weights_for(&cheap_then_steep(), 5).unwrap();
        assert_eq!(w.path_charge(&Path(vec![]), &[0, 0]), EpsCost::zero());
    }
}
