//! Weighted undirected graphs with a source, actual terminals and predicted
//! terminals, plus their metric closure.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::MulticastError;
use crate::rational::Rational;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Rational,
}

impl WeightedEdge {
    /// The endpoint that is not `x`.
    pub fn other(&self, x: VertexId) -> VertexId {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// A multicast game instance.
///
/// Vertices are identified by their position in the vertex list, and that
/// order is the id order used for every tie-break. The source is kept out of
/// the terminal and prediction sets; it stands for player 0, who is always
/// predicted correctly.
#[derive(Debug, Clone)]
pub struct MulticastInstance {
    names: Vec<String>,
    edges: Vec<WeightedEdge>,
    adjacency: Vec<Vec<(VertexId, EdgeId)>>,
    source: VertexId,
    terminals: Vec<VertexId>,
    predictions: Vec<VertexId>,
    closure: MetricClosure,
}

impl MulticastInstance {
    /// Builds and validates an instance. Repeated terminals or predictions
    /// collapse to one, and the source is dropped from both sets.
    pub fn new(
        names: Vec<String>,
        edges: Vec<WeightedEdge>,
        source: VertexId,
        terminals: &[VertexId],
        predictions: &[VertexId],
    ) -> Result<Self, MulticastError> {
        let n = names.len();
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(MulticastError::DuplicateVertex(name.clone()));
            }
        }
        let check = |v: VertexId| {
            if v < n {
                Ok(v)
            } else {
                Err(MulticastError::UnknownVertex(v.to_string()))
            }
        };
        check(source)?;
        let mut adjacency = vec![Vec::new(); n];
        let mut pairs = BTreeSet::new();
        for (id, e) in edges.iter().enumerate() {
            check(e.u)?;
            check(e.v)?;
            if e.u == e.v {
                return Err(MulticastError::SelfLoop(names[e.u].clone()));
            }
            if e.weight <= Rational::zero() {
                return Err(MulticastError::NonPositiveWeight {
                    u: names[e.u].clone(),
                    v: names[e.v].clone(),
                });
            }
            if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(MulticastError::DuplicateEdge {
                    u: names[e.u].clone(),
                    v: names[e.v].clone(),
                });
            }
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let collect = |set: &[VertexId]| -> Result<Vec<VertexId>, MulticastError> {
            let mut out = BTreeSet::new();
            for &v in set {
                if check(v)? != source {
                    out.insert(v);
                }
            }
            Ok(out.into_iter().collect())
        };
        let terminals = collect(terminals)?;
        let predictions = collect(predictions)?;
        let closure = MetricClosure::build(n, &edges, &adjacency);
        if let Some(v) = (0..n).find(|&v| closure.dist[source][v].is_none()) {
            return Err(MulticastError::Disconnected(names[v].clone()));
        }
        Ok(MulticastInstance {
            names,
            edges,
            adjacency,
            source,
            terminals,
            predictions,
            closure,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[WeightedEdge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &WeightedEdge {
        &self.edges[e]
    }

    /// Edge between `u` and `v`, if any.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adjacency[u].iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }

    /// Neighbours of `v` with the connecting edge, in ascending vertex id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adjacency[v]
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    /// Actual terminals `R`, ascending, without the source.
    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    /// Predicted terminals `H`, ascending, without the source.
    pub fn predictions(&self) -> &[VertexId] {
        &self.predictions
    }

    /// Same graph with a different prediction set.
    pub fn with_predictions(&self, predictions: &[VertexId]) -> Result<Self, MulticastError> {
        let mut out = self.clone();
        let mut set = BTreeSet::new();
        for &h in predictions {
            if h >= self.num_vertices() {
                return Err(MulticastError::UnknownVertex(h.to_string()));
            }
            if h != self.source {
                set.insert(h);
            }
        }
        out.predictions = set.into_iter().collect();
        Ok(out)
    }

    pub fn metric_closure(&self) -> &MetricClosure {
        &self.closure
    }

    /// Shortest-path distance.
    pub fn dist(&self, u: VertexId, v: VertexId) -> &Rational {
        self.closure.dist(u, v)
    }

    /// Total weight of a set of edges.
    pub fn weight_of(&self, edges: impl IntoIterator<Item = EdgeId>) -> Rational {
        edges
            .into_iter()
            .fold(Rational::zero(), |acc, e| acc + &self.edges[e].weight)
    }

    /// Converts a vertex walk to the edges it traverses.
    pub fn walk_edges(&self, walk: &[VertexId]) -> Vec<EdgeId> {
        walk.windows(2)
            .map(|w| self.edge_between(w[0], w[1]).expect("walk follows graph edges"))
            .collect()
    }
}

/// All-pairs shortest distances.
#[derive(Debug, Clone)]
pub struct MetricClosure {
    dist: Vec<Vec<Option<Rational>>>,
    adjacency: Vec<Vec<(VertexId, Rational)>>,
}

impl MetricClosure {
    fn build(n: usize, edges: &[WeightedEdge], adjacency: &[Vec<(VertexId, EdgeId)>]) -> Self {
        let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
        for (v, row) in dist.iter_mut().enumerate() {
            row[v] = Some(Rational::zero());
        }
        for e in edges {
            dist[e.u][e.v] = Some(e.weight.clone());
            dist[e.v][e.u] = Some(e.weight.clone());
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = dist[i][k].clone() else { continue };
                for j in 0..n {
                    if let Some(kj) = &dist[k][j] {
                        let via = &ik + kj;
                        if dist[i][j].as_ref().is_none_or(|cur| via < *cur) {
                            dist[i][j] = Some(via);
                        }
                    }
                }
            }
        }
        let adjacency = adjacency
            .iter()
            .map(|list| list.iter().map(|&(w, e)| (w, edges[e].weight.clone())).collect())
            .collect();
        MetricClosure { dist, adjacency }
    }

    pub fn num_vertices(&self) -> usize {
        self.dist.len()
    }

    /// Distance between two vertices of a connected instance.
    pub fn dist(&self, u: VertexId, v: VertexId) -> &Rational {
        self.dist[u][v].as_ref().expect("instance graph is connected")
    }

    /// Lexicographically smallest shortest path from `u` to `v`.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let mut walk = vec![u];
        let mut x = u;
        while x != v {
            let d = self.dist(x, v);
            // Weights are positive, so each step strictly decreases the distance.
            x = self.adjacency[x]
                .iter()
                .find(|(y, w)| &(w + self.dist(*y, v)) == d)
                .map(|&(y, _)| y)
                .expect("some neighbour lies on a shortest path");
            walk.push(x);
        }
        walk
    }

    /// `min_{c in set} d(v, c)` and the smallest nearest member.
    pub fn nearest<'a>(&self, v: VertexId, set: impl IntoIterator<Item = &'a VertexId>) -> Option<(VertexId, Rational)> {
        let mut best: Option<(VertexId, Rational)> = None;
        for &c in set {
            let d = self.dist(v, c);
            let better = match &best {
                None => true,
                Some((b, bd)) => d < bd || (d == bd && c < *b),
            };
            if better {
                best = Some((c, d.clone()));
            }
        }
        best
    }
}
