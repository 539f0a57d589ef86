//! The ordered cost-sharing game: charges, the greedy equilibrium and
//! equilibrium verification.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::graph::{EdgeId, MulticastInstance, VertexId};
use super::order::PriorityOrder;
use super::MulticastError;
use crate::rational::Rational;

/// One edge set per terminal, aligned with `inst.terminals()`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MulticastProfile(pub Vec<Vec<EdgeId>>);

/// A profile with its charges and total cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastOutcome {
    pub profile: MulticastProfile,
    /// Charges aligned with `inst.terminals()`.
    pub shares: Vec<Rational>,
    /// Weight of the union of all used edges.
    pub cost: Rational,
}

/// Terminals in priority order, as indices into `inst.terminals()`.
pub fn player_order(inst: &MulticastInstance, order: &PriorityOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..inst.terminals().len()).collect();
    idx.sort_by_key(|&i| order.rank(inst.terminals()[i]));
    idx
}

fn connects(inst: &MulticastInstance, edges: &[EdgeId], a: VertexId, b: VertexId) -> bool {
    let mut reached = BTreeSet::from([a]);
    let mut grew = true;
    while grew {
        grew = false;
        for &e in edges {
            let edge = inst.edge(e);
            let (u, v) = (edge.u, edge.v);
            if reached.contains(&u) != reached.contains(&v) {
                reached.insert(u);
                reached.insert(v);
                grew = true;
            }
        }
    }
    reached.contains(&b)
}

fn validate(inst: &MulticastInstance, profile: &MulticastProfile) -> Result<(), MulticastError> {
    if profile.0.len() != inst.terminals().len() {
        return Err(MulticastError::ProfileLength {
            expected: inst.terminals().len(),
            found: profile.0.len(),
        });
    }
    for (i, edges) in profile.0.iter().enumerate() {
        let t = inst.terminals()[i];
        if edges.iter().any(|&e| e >= inst.edges().len()) || !connects(inst, edges, inst.source(), t) {
            return Err(MulticastError::PathDoesNotConnect(inst.name(t).to_string()));
        }
    }
    Ok(())
}

/// Charges each edge's full weight to its first user in priority order.
pub fn ordered_shares(
    inst: &MulticastInstance,
    order: &PriorityOrder,
    profile: &MulticastProfile,
) -> Result<Vec<Rational>, MulticastError> {
    validate(inst, profile)?;
    let mut claimed = vec![false; inst.edges().len()];
    let mut shares = vec![Rational::zero(); profile.0.len()];
    for i in player_order(inst, order) {
        let mine: BTreeSet<EdgeId> = profile.0[i].iter().copied().collect();
        for e in mine {
            if !claimed[e] {
                claimed[e] = true;
                shares[i] += &inst.edge(e).weight;
            }
        }
    }
    Ok(shares)
}

/// Weight of the union of all edges in the profile.
pub fn social_cost(inst: &MulticastInstance, profile: &MulticastProfile) -> Rational {
    let used: BTreeSet<EdgeId> = profile.0.iter().flatten().copied().collect();
    inst.weight_of(used)
}

/// Vertices touched by the claimed edges, plus the source.
fn component(inst: &MulticastInstance, claimed: &[bool]) -> Vec<VertexId> {
    let mut set = BTreeSet::from([inst.source()]);
    for (e, _) in claimed.iter().enumerate().filter(|(_, &c)| c) {
        set.insert(inst.edge(e).u);
        set.insert(inst.edge(e).v);
    }
    set.into_iter().collect()
}

/// Path from `from` to the source inside the claimed edges (a tree).
fn tree_path(inst: &MulticastInstance, claimed: &[bool], from: VertexId) -> Vec<EdgeId> {
    let n = inst.num_vertices();
    let mut via: Vec<Option<EdgeId>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[inst.source()] = true;
    let mut queue = std::collections::VecDeque::from([inst.source()]);
    while let Some(x) = queue.pop_front() {
        for &(y, e) in inst.neighbors(x) {
            if claimed[e] && !seen[y] {
                seen[y] = true;
                via[y] = Some(e);
                queue.push_back(y);
            }
        }
    }
    let mut out = Vec::new();
    let mut x = from;
    while x != inst.source() {
        let e = via[x].expect("component is connected to the source");
        out.push(e);
        x = inst.edge(e).other(x);
    }
    out
}

/// Every shortest walk from `t` to the nearest vertex of `comp`, as edge lists.
fn shortest_prefixes(inst: &MulticastInstance, comp: &[VertexId], t: VertexId, limit: usize) -> Vec<Vec<EdgeId>> {
    let closure = inst.metric_closure();
    let to_comp: Vec<Rational> = (0..inst.num_vertices())
        .map(|v| closure.nearest(v, comp).expect("component holds the source").1)
        .collect();
    let in_comp: BTreeSet<VertexId> = comp.iter().copied().collect();
    let mut out = Vec::new();
    let mut stack = vec![(t, Vec::new())];
    while let Some((x, edges)) = stack.pop() {
        if in_comp.contains(&x) {
            out.push(edges);
            if out.len() >= limit {
                break;
            }
            continue;
        }
        for &(y, e) in inst.neighbors(x).iter().rev() {
            if &inst.edge(e).weight + &to_comp[y] == to_comp[x] {
                let mut next = edges.clone();
                next.push(e);
                stack.push((y, next));
            }
        }
    }
    out
}

/// Lets players join in priority order, each taking a cheapest connection to
/// the component built so far (claimed edges are free to her) and then the
/// tree path back to the source.
pub fn greedy_pne(inst: &MulticastInstance, order: &PriorityOrder) -> MulticastOutcome {
    let mut claimed = vec![false; inst.edges().len()];
    let mut paths = vec![Vec::new(); inst.terminals().len()];
    let mut shares = vec![Rational::zero(); inst.terminals().len()];
    for i in player_order(inst, order) {
        let t = inst.terminals()[i];
        let comp = component(inst, &claimed);
        let prefix = shortest_prefixes(inst, &comp, t, 1).remove(0);
        let hit = prefix.iter().fold(t, |x, &e| inst.edge(e).other(x));
        shares[i] = inst.weight_of(prefix.iter().copied());
        let mut path = prefix;
        path.extend(tree_path(inst, &claimed, hit));
        for &e in &path {
            claimed[e] = true;
        }
        paths[i] = path;
    }
    let profile = MulticastProfile(paths);
    let cost = social_cost(inst, &profile);
    MulticastOutcome { profile, shares, cost }
}

/// A player who could lower her charge by switching paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastDeviation {
    pub terminal: VertexId,
    pub charge: Rational,
    pub best: Rational,
}

/// Checks every player against her best response. Her charge depends only on
/// the players ahead of her, and her cheapest alternative costs her distance
/// to the vertices they already use.
pub fn check_pne(
    inst: &MulticastInstance,
    order: &PriorityOrder,
    profile: &MulticastProfile,
) -> Result<Vec<MulticastDeviation>, MulticastError> {
    let shares = ordered_shares(inst, order, profile)?;
    let mut claimed = vec![false; inst.edges().len()];
    let mut out = Vec::new();
    for i in player_order(inst, order) {
        let t = inst.terminals()[i];
        let comp = component(inst, &claimed);
        let best = inst.metric_closure().nearest(t, &comp).expect("non-empty").1;
        if shares[i] > best {
            out.push(MulticastDeviation {
                terminal: t,
                charge: shares[i].clone(),
                best,
            });
        }
        for &e in &profile.0[i] {
            claimed[e] = true;
        }
    }
    Ok(out)
}

/// Every simple path between `a` and `b`, as edge lists.
pub fn simple_paths(inst: &MulticastInstance, a: VertexId, b: VertexId) -> Vec<Vec<EdgeId>> {
    fn go(
        inst: &MulticastInstance,
        x: VertexId,
        b: VertexId,
        on: &mut Vec<bool>,
        edges: &mut Vec<EdgeId>,
        out: &mut Vec<Vec<EdgeId>>,
    ) {
        if x == b {
            out.push(edges.clone());
            return;
        }
        for &(y, e) in inst.neighbors(x) {
            if !on[y] {
                on[y] = true;
                edges.push(e);
                go(inst, y, b, on, edges, out);
                edges.pop();
                on[y] = false;
            }
        }
    }
    let mut on = vec![false; inst.num_vertices()];
    on[a] = true;
    let mut out = Vec::new();
    go(inst, a, b, &mut on, &mut Vec::new(), &mut out);
    out
}

/// Every equilibrium reachable by varying tie-breaks among cheapest
/// connections. Stops after `cap` profiles.
pub fn enumerate_tie_variants(inst: &MulticastInstance, order: &PriorityOrder, cap: usize) -> Vec<MulticastOutcome> {
    let players = player_order(inst, order);
    let mut out = Vec::new();
    let mut paths = vec![Vec::new(); inst.terminals().len()];
    let mut claimed = vec![false; inst.edges().len()];
    descend(inst, &players, 0, &mut claimed, &mut paths, cap, &mut out);
    out
}

fn descend(
    inst: &MulticastInstance,
    players: &[usize],
    depth: usize,
    claimed: &mut Vec<bool>,
    paths: &mut Vec<Vec<EdgeId>>,
    cap: usize,
    out: &mut Vec<MulticastOutcome>,
) {
    if out.len() >= cap {
        return;
    }
    if depth == players.len() {
        let profile = MulticastProfile(paths.clone());
        let shares = {
            let mut seen = vec![false; claimed.len()];
            let mut shares = vec![Rational::zero(); paths.len()];
            for &i in players {
                for &e in &paths[i] {
                    if !seen[e] {
                        seen[e] = true;
                        shares[i] += &inst.edge(e).weight;
                    }
                }
            }
            shares
        };
        let cost = social_cost(inst, &profile);
        out.push(MulticastOutcome { profile, shares, cost });
        return;
    }
    let i = players[depth];
    let t = inst.terminals()[i];
    let comp = component(inst, claimed);
    for prefix in shortest_prefixes(inst, &comp, t, cap) {
        let hit = prefix.iter().fold(t, |x, &e| inst.edge(e).other(x));
        let mut path = prefix;
        path.extend(tree_path(inst, claimed, hit));
        let newly: Vec<EdgeId> = path.iter().copied().filter(|&e| !claimed[e]).collect();
        for &e in &newly {
            claimed[e] = true;
        }
        paths[i] = path;
        descend(inst, players, depth + 1, claimed, paths, cap, out);
        for &e in &newly {
            claimed[e] = false;
        }
        if out.len() >= cap {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicast::graph::WeightedEdge;
    use crate::multicast::order::prediction_order;
    use crate::rational::int;

    fn graph(n: usize, edges: &[(usize, usize, i64)], r: &[usize], h: &[usize]) -> MulticastInstance {
        let names = (0..n).map(|i| if i == 0 { "s".into() } else { format!("v{i}") }).collect();
        let edges = edges
            .iter()
            .map(|&(u, v, w)| WeightedEdge { u, v, weight: int(w) })
            .collect();
        MulticastInstance::new(names, edges, 0, r, h).unwrap()
    }

    /// Minimum charge over every simple source-terminal path, given the
    /// players ahead in the order.
    fn exhaustive_best(inst: &MulticastInstance, order: &PriorityOrder, profile: &MulticastProfile) -> Vec<Rational> {
        let mut claimed = vec![false; inst.edges().len()];
        let mut best = vec![Rational::zero(); inst.terminals().len()];
        for i in player_order(inst, order) {
            let t = inst.terminals()[i];
            best[i] = simple_paths(inst, inst.source(), t)
                .iter()
                .map(|p| inst.weight_of(p.iter().copied().filter(|&e| !claimed[e])))
                .min()
                .unwrap();
            for &e in &profile.0[i] {
                claimed[e] = true;
            }
        }
        best
    }

    #[test]
    fn single_player_takes_shortest_path() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[2], &[2]);
        let out = greedy_pne(&g, &prediction_order(&g));
        assert_eq!(out.cost, int(2));
        assert_eq!(out.profile.0, vec![vec![1, 0]]);
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)], &[2], &[1]);
        assert_eq!(greedy_pne(&g, &prediction_order(&g)).cost, int(2));
    }

    #[test]
    fn shares_follow_priority() {
        // s - a (5), a - b (1), a - c (2); both b and c share the stem.
        let g = graph(4, &[(0, 1, 5), (1, 2, 1), (1, 3, 2)], &[2, 3], &[2, 3]);
        let order = prediction_order(&g);
        let out = greedy_pne(&g, &order);
        assert_eq!(out.shares, vec![int(6), int(2)]);
        assert_eq!(out.cost, int(8));
        assert_eq!(ordered_shares(&g, &order, &out.profile).unwrap(), out.shares);
        assert!(check_pne(&g, &order, &out.profile).unwrap().is_empty());
    }

    #[test]
    fn disjoint_paths_pay_their_own_weight() {
        let g = graph(3, &[(0, 1, 3), (0, 2, 4)], &[1, 2], &[1, 2]);
        let order = prediction_order(&g);
        let profile = MulticastProfile(vec![vec![0], vec![1]]);
        assert_eq!(ordered_shares(&g, &order, &profile).unwrap(), vec![int(3), int(4)]);
    }

    #[test]
    fn detour_is_not_an_equilibrium() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 5)], &[2], &[2]);
        let order = prediction_order(&g);
        let bad = MulticastProfile(vec![vec![2]]);
        let dev = check_pne(&g, &order, &bad).unwrap();
        assert_eq!(dev.len(), 1);
        assert_eq!(dev[0].charge, int(5));
        assert_eq!(dev[0].best, int(2));
        let broken = MulticastProfile(vec![vec![0]]);
        assert!(matches!(
            check_pne(&g, &order, &broken),
            Err(MulticastError::PathDoesNotConnect(_))
        ));
    }

    #[test]
    fn greedy_matches_exhaustive_best_responses() {
        let g = graph(
            6,
            &[(0, 1, 2), (0, 2, 3), (1, 2, 1), (1, 3, 4), (2, 4, 2), (3, 4, 1), (3, 5, 2), (4, 5, 3)],
            &[3, 5, 2],
            &[4, 5],
        );
        let order = prediction_order(&g);
        let out = greedy_pne(&g, &order);
        assert_eq!(out.shares, exhaustive_best(&g, &order, &out.profile));
        let total: Rational = out.shares.iter().sum();
        assert_eq!(total, out.cost);
        for variant in enumerate_tie_variants(&g, &order, 1000) {
            assert!(check_pne(&g, &order, &variant.profile).unwrap().is_empty());
            assert_eq!(variant.shares, exhaustive_best(&g, &order, &variant.profile));
        }
    }

    #[test]
    fn ties_produce_variants() {
        // Square s-a-c, s-b-c with equal weights: two cheapest connections.
        let g = graph(4, &[(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 1)], &[3], &[3]);
        let order = prediction_order(&g);
        let all = enumerate_tie_variants(&g, &order, 10);
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|o| o.cost == int(2)));
        assert_eq!(all[0].profile, greedy_pne(&g, &order).profile);
    }

    #[test]
    fn terminal_on_built_component_pays_nothing() {
        // v1 is the far end of s - v2 - v1; both attach to prediction v1,
        // which goes first by id, so v2 finds itself already connected.
        let g = graph(3, &[(0, 2, 3), (2, 1, 1)], &[1, 2], &[1]);
        let out = greedy_pne(&g, &prediction_order(&g));
        assert_eq!(out.shares, vec![int(4), int(0)]);
        assert_eq!(out.cost, int(4));
    }
}
