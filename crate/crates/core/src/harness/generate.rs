//! Seeded random instances. Every generator is a pure function of its
//! arguments.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::instance::{EdgeSpec, InstanceFile, MulticastSpec, SpgSpec};
use crate::spg::SpgTree;

#[derive(Debug, Clone, PartialEq)]
pub struct SpgGenConfig {
    pub max_edges: usize,
    pub max_cost: i64,
    /// Share of edges that get a finite capacity.
    pub capacitated_fraction: f64,
    /// Largest load every table covers.
    pub horizon: usize,
    /// Redraw until the network has at most this many paths.
    pub max_paths: Option<u128>,
    pub n: usize,
    pub n_hat: usize,
}

impl Default for SpgGenConfig {
    fn default() -> Self {
        SpgGenConfig {
            max_edges: 8,
            max_cost: 100,
            capacitated_fraction: 0.25,
            horizon: 10,
            max_paths: None,
            n: 1,
            n_hat: 1,
        }
    }
}

fn random_expr(rng: &mut ChaCha8Rng, edges: std::ops::Range<usize>) -> String {
    if edges.len() == 1 {
        return format!("e(e{})", edges.start);
    }
    let mid = rng.gen_range(edges.start + 1..edges.end);
    let op = if rng.gen_bool(0.5) { 'S' } else { 'P' };
    let left = random_expr(rng, edges.start..mid);
    let right = random_expr(rng, mid..edges.end);
    format!("{op}({left},{right})")
}

/// Non-decreasing integer table with `c(1) >= 1`, all values `<= max_cost`.
fn random_table(rng: &mut ChaCha8Rng, horizon: usize, max_cost: i64, capacity: Option<usize>) -> Vec<String> {
    let mut values: Vec<i64> = match rng.gen_range(0..3) {
        // Constant once used.
        0 => vec![rng.gen_range(1..=max_cost); horizon],
        // Linear-ish growth.
        1 => {
            let slope = rng.gen_range(1..=(max_cost / horizon as i64).max(1));
            (1..=horizon as i64).map(|l| (slope * l).min(max_cost)).collect()
        }
        // Arbitrary monotone.
        _ => (0..horizon).map(|_| rng.gen_range(1..=max_cost)).collect(),
    };
    values.sort_unstable();
    let mut out = vec!["0".to_string()];
    for (i, v) in values.into_iter().enumerate() {
        let load = i + 1;
        if capacity.is_some_and(|cap| load > cap) {
            out.push("inf".to_string());
        } else {
            out.push(v.to_string());
        }
    }
    out
}

/// A random series-parallel network with integer cost tables.
///
/// The edges of the network's first path are never capacitated, so every
/// load up to the horizon has a finite optimum.
pub fn generate_spg(seed: u64, cfg: &SpgGenConfig) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (expr, tree) = loop {
        let m = rng.gen_range(1..=cfg.max_edges.max(1));
        let expr = random_expr(&mut rng, 0..m);
        let tree = SpgTree::parse(&expr).expect("generated expressions parse");
        if cfg.max_paths.is_none_or(|cap| tree.count_paths() <= cap) {
            break (expr, tree);
        }
    };
    let protected: BTreeSet<usize> = tree.enumerate_paths()[0].edges().iter().copied().collect();
    let mut costs = BTreeMap::new();
    for e in 0..tree.num_edges() {
        let capacity = (!protected.contains(&e) && rng.gen_bool(cfg.capacitated_fraction))
            .then(|| rng.gen_range(1..=cfg.horizon));
        costs.insert(
            tree.edge_name(e).to_string(),
            random_table(&mut rng, cfg.horizon, cfg.max_cost, capacity),
        );
    }
    InstanceFile::Spg(SpgSpec {
        decomposition: expr,
        costs,
        n: cfg.n,
        n_hat: cfg.n_hat,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastGenConfig {
    pub vertices: usize,
    pub terminals: usize,
    /// Probability of each non-tree edge.
    pub edge_probability: f64,
    pub max_weight: i64,
    /// Hop radius for moving each prediction away from its terminal.
    pub radius: usize,
    /// Drop and add predictions so that `|H|` and `|R|` differ.
    pub unknown_set: bool,
}

impl Default for MulticastGenConfig {
    fn default() -> Self {
        MulticastGenConfig {
            vertices: 10,
            terminals: 5,
            edge_probability: 0.3,
            max_weight: 10,
            radius: 0,
            unknown_set: false,
        }
    }
}

/// A random connected weighted graph with source `s`, terminals and
/// perturbed predictions. The recorded assignment maps each terminal to the
/// prediction it was moved to.
pub fn generate_multicast(seed: u64, cfg: &MulticastGenConfig) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.vertices.max(2);
    let names: Vec<String> = (0..n)
        .map(|i| if i == 0 { "s".to_string() } else { format!("v{i}") })
        .collect();
    let mut pairs = BTreeSet::new();
    for v in 1..n {
        pairs.insert((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !pairs.contains(&(u, v)) && rng.gen_bool(cfg.edge_probability) {
                pairs.insert((u, v));
            }
        }
    }
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for &(u, v) in &pairs {
        adjacency[u].push(v);
        adjacency[v].push(u);
        edges.push(EdgeSpec {
            u: names[u].clone(),
            v: names[v].clone(),
            weight: rng.gen_range(1..=cfg.max_weight).to_string(),
        });
    }

    let mut others: Vec<usize> = (1..n).collect();
    others.shuffle(&mut rng);
    let mut terminals: Vec<usize> = others[..cfg.terminals.min(n - 1)].to_vec();
    terminals.sort_unstable();

    let mut moved = BTreeMap::new();
    for &t in &terminals {
        let ball = hop_ball(&adjacency, t, cfg.radius);
        moved.insert(t, *ball.choose(&mut rng).expect("ball holds its centre"));
    }
    let mut predictions: BTreeSet<usize> = moved.values().copied().filter(|&h| h != 0).collect();
    if cfg.unknown_set {
        let drop = rng.gen_range(0..=predictions.len() / 2);
        let mut listed: Vec<usize> = predictions.iter().copied().collect();
        listed.shuffle(&mut rng);
        for h in &listed[..drop] {
            predictions.remove(h);
        }
        let add = rng.gen_range(0..=2);
        for _ in 0..add {
            predictions.insert(rng.gen_range(1..n));
        }
        if drop == 0 && add == 0 {
            predictions.insert(rng.gen_range(1..n));
        }
    }
    let assignment = moved
        .iter()
        .filter(|(_, h)| **h == 0 || predictions.contains(h))
        .map(|(&t, &h)| (names[t].clone(), names[h].clone()))
        .collect();
    InstanceFile::Multicast(MulticastSpec {
        vertices: names.clone(),
        edges,
        source: names[0].clone(),
        terminals: terminals.iter().map(|&t| names[t].clone()).collect(),
        predictions: predictions.iter().map(|&h| names[h].clone()).collect(),
        assignment: Some(assignment),
    })
}

/// Vertices within `radius` hops of `centre`, ascending.
fn hop_ball(adjacency: &[Vec<usize>], centre: usize, radius: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; adjacency.len()];
    depth[centre] = 0;
    let mut queue = VecDeque::from([centre]);
    while let Some(x) = queue.pop_front() {
        if depth[x] == radius {
            continue;
        }
        for &y in &adjacency[x] {
            if depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                queue.push_back(y);
            }
        }
    }
    (0..adjacency.len()).filter(|&v| depth[v] != usize::MAX).collect()
}
