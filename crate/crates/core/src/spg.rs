//! Series-parallel graphs held as their binary decomposition tree.
//!
//! Nodes are numbered in pre-order, so the root is component `0` and every
//! child has a larger id than its parent. Edges are numbered in the order
//! their leaves appear, which makes the edges of any component a contiguous
//! index range.
//!
//! Deterministic choices always prefer the left subtree.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::costfn::{CostTable, CostValue};

pub type EdgeIdx = usize;
pub type ComponentId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Edge(EdgeIdx),
    Series(ComponentId, ComponentId),
    Parallel(ComponentId, ComponentId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpgError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("load profile is inconsistent at component {component}")]
    Inconsistent { component: ComponentId },
    #[error("load profile has {found} entries, graph has {expected} edges")]
    WrongLength { expected: usize, found: usize },
    #[error("root loads violate k' <= k (k = {k}, k' = {k_prime})")]
    Precondition { k: usize, k_prime: usize },
    #[error("no cost table for edge `{0}`")]
    MissingCost(String),
    #[error("cost table given for unknown edge `{0}`")]
    UnknownEdge(String),
}

/// An s-t path as the list of edges it traverses, in source-to-sink order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<EdgeIdx>);

impl Path {
    pub fn edges(&self) -> &[EdgeIdx] {
        &self.0
    }

    pub fn contains(&self, edge: EdgeIdx) -> bool {
        self.0.contains(&edge)
    }

    fn concat(mut self, other: Path) -> Path {
        self.0.extend(other.0);
        self
    }
}

/// Number of players on every edge, indexed by [`EdgeIdx`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoadProfile(pub Vec<usize>);

impl LoadProfile {
    pub fn zeros(edges: usize) -> Self {
        LoadProfile(vec![0; edges])
    }

    pub fn get(&self, edge: EdgeIdx) -> usize {
        self.0[edge]
    }

    pub fn add_path(&mut self, path: &Path) {
        for &e in path.edges() {
            self.0[e] += 1;
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Edge-wise `self <= other`.
    pub fn dominated_by(&self, other: &LoadProfile) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn from_paths<'a>(edges: usize, paths: impl IntoIterator<Item = &'a Path>) -> Self {
        let mut loads = LoadProfile::zeros(edges);
        for p in paths {
            loads.add_path(p);
        }
        loads
    }
}

/// The decomposition tree of a series-parallel graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpgTree {
    nodes: Vec<Node>,
    edge_names: Vec<String>,
    edge_ranges: Vec<Range<EdgeIdx>>,
    edge_component: Vec<ComponentId>,
}

impl SpgTree {
    /// Parses `E ::= e(id) | S(E,E) | P(E,E)`; whitespace is ignored.
    pub fn parse(expr: &str) -> Result<Self, SpgError> {
        let mut parser = Parser {
            src: expr.as_bytes(),
            pos: 0,
            tree: SpgTree {
                nodes: Vec::new(),
                edge_names: Vec::new(),
                edge_ranges: Vec::new(),
                edge_component: Vec::new(),
            },
            seen: HashSet::new(),
        };
        parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(parser.tree)
    }

    pub fn root(&self) -> ComponentId {
        0
    }

    pub fn node(&self, c: ComponentId) -> Node {
        self.nodes[c]
    }

    pub fn num_components(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_names.len()
    }

    pub fn edge_name(&self, e: EdgeIdx) -> &str {
        &self.edge_names[e]
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn edge_index(&self, name: &str) -> Option<EdgeIdx> {
        self.edge_names.iter().position(|n| n == name)
    }

    /// Edges inside component `c`.
    pub fn edges_of(&self, c: ComponentId) -> Range<EdgeIdx> {
        self.edge_ranges[c].clone()
    }

    /// Component id of the leaf holding edge `e`.
    pub fn edge_component(&self, e: EdgeIdx) -> ComponentId {
        self.edge_component[e]
    }

    /// All source-sink paths of component `c`: series is a cross product with
    /// the left side varying slowest, parallel lists the left side first.
    pub fn paths_of(&self, c: ComponentId) -> Vec<Path> {
        match self.nodes[c] {
            Node::Edge(e) => vec![Path(vec![e])],
            Node::Series(l, r) => {
                let right = self.paths_of(r);
                let mut out = Vec::new();
                for lp in self.paths_of(l) {
                    for rp in &right {
                        out.push(lp.clone().concat(rp.clone()));
                    }
                }
                out
            }
            Node::Parallel(l, r) => {
                let mut out = self.paths_of(l);
                out.extend(self.paths_of(r));
                out
            }
        }
    }

    pub fn enumerate_paths(&self) -> Vec<Path> {
        self.paths_of(self.root())
    }

    /// Number of s-t paths, without materializing them.
    pub fn count_paths(&self) -> u128 {
        fn go(t: &SpgTree, c: ComponentId) -> u128 {
            match t.nodes[c] {
                Node::Edge(_) => 1,
                Node::Series(l, r) => go(t, l).saturating_mul(go(t, r)),
                Node::Parallel(l, r) => go(t, l).saturating_add(go(t, r)),
            }
        }
        go(self, self.root())
    }

    fn check_len(&self, loads: &LoadProfile) -> Result<(), SpgError> {
        if loads.0.len() != self.num_edges() {
            return Err(SpgError::WrongLength {
                expected: self.num_edges(),
                found: loads.0.len(),
            });
        }
        Ok(())
    }

    /// Recursive load of every component, checking consistency bottom-up.
    pub fn component_loads(&self, loads: &LoadProfile) -> Result<Vec<usize>, SpgError> {
        self.check_len(loads)?;
        let mut out = vec![0; self.nodes.len()];
        for c in (0..self.nodes.len()).rev() {
            out[c] = match self.nodes[c] {
                Node::Edge(e) => loads.get(e),
                Node::Series(l, r) => {
                    if out[l] != out[r] {
                        return Err(SpgError::Inconsistent { component: c });
                    }
                    out[l]
                }
                Node::Parallel(l, r) => out[l] + out[r],
            };
        }
        Ok(out)
    }

    pub fn component_load(&self, loads: &LoadProfile, c: ComponentId) -> Result<usize, SpgError> {
        Ok(self.component_loads(loads)?[c])
    }

    /// First path (in [`enumerate_paths`](Self::enumerate_paths) order) on
    /// which every edge has `loads[e] < cap[e]`.
    pub fn find_residual_path(&self, loads: &LoadProfile, cap: &LoadProfile) -> Option<Path> {
        self.residual_in(self.root(), loads.as_slice(), cap.as_slice())
    }

    fn residual_in(&self, c: ComponentId, loads: &[usize], cap: &[usize]) -> Option<Path> {
        match self.nodes[c] {
            Node::Edge(e) => (loads[e] < cap[e]).then(|| Path(vec![e])),
            Node::Series(l, r) => {
                let left = self.residual_in(l, loads, cap)?;
                let right = self.residual_in(r, loads, cap)?;
                Some(left.concat(right))
            }
            Node::Parallel(l, r) => self
                .residual_in(l, loads, cap)
                .or_else(|| self.residual_in(r, loads, cap)),
        }
    }

    /// A source(c)-sink(c) path on which `a` is strictly larger than `b` on
    /// every edge, when `a(c) > b(c)`.
    pub fn witness_strict_path(
        &self,
        a: &LoadProfile,
        b: &LoadProfile,
        c: ComponentId,
    ) -> Result<Option<Path>, SpgError> {
        let la = self.component_loads(a)?;
        let lb = self.component_loads(b)?;
        Ok(self.witness_in(c, &la, &lb))
    }

    fn witness_in(&self, c: ComponentId, la: &[usize], lb: &[usize]) -> Option<Path> {
        if la[c] <= lb[c] {
            return None;
        }
        match self.nodes[c] {
            Node::Edge(e) => Some(Path(vec![e])),
            Node::Series(l, r) => {
                let left = self.witness_in(l, la, lb)?;
                let right = self.witness_in(r, la, lb)?;
                Some(left.concat(right))
            }
            Node::Parallel(l, r) => self
                .witness_in(l, la, lb)
                .or_else(|| self.witness_in(r, la, lb)),
        }
    }

    /// Builds a load profile `A` for `k` players with
    /// `A'_e <= A_e <= max(A'_e, O_e)` on every edge, where `O` routes `k`
    /// players and `A'` routes `k' <= k`.
    pub fn sandwiched_allocation(
        &self,
        opt: &LoadProfile,
        prior: &LoadProfile,
    ) -> Result<LoadProfile, SpgError> {
        let lo = self.component_loads(opt)?;
        let lp = self.component_loads(prior)?;
        let root = self.root();
        if lp[root] > lo[root] {
            return Err(SpgError::Precondition {
                k: lo[root],
                k_prime: lp[root],
            });
        }
        let mut target = vec![0usize; self.nodes.len()];
        target[root] = lo[root];
        let mut out = LoadProfile::zeros(self.num_edges());
        // Pre-order ids: parents are settled before their children.
        for c in 0..self.nodes.len() {
            let total = target[c];
            match self.nodes[c] {
                Node::Edge(e) => out.0[e] = total,
                Node::Series(l, r) => {
                    target[l] = total;
                    target[r] = total;
                }
                Node::Parallel(l, r) => {
                    let upper_left = lp[l].max(lo[l]);
                    let lower_right = lp[r];
                    let left = upper_left.min(total - lower_right);
                    target[l] = left;
                    target[r] = total - left;
                }
            }
        }
        Ok(out)
    }

    /// Expands the tree into an explicit multigraph `(vertices, edges)` with
    /// source `0` and sink `1`; edge `i` of the result is [`EdgeIdx`] `i`.
    pub fn flatten(&self) -> (usize, Vec<(usize, usize)>) {
        let mut edges = vec![(0, 0); self.num_edges()];
        let mut next_vertex = 2;
        let mut stack = vec![(self.root(), 0usize, 1usize)];
        while let Some((c, s, t)) = stack.pop() {
            match self.nodes[c] {
                Node::Edge(e) => edges[e] = (s, t),
                Node::Series(l, r) => {
                    let mid = next_vertex;
                    next_vertex += 1;
                    stack.push((l, s, mid));
                    stack.push((r, mid, t));
                }
                Node::Parallel(l, r) => {
                    stack.push((l, s, t));
                    stack.push((r, s, t));
                }
            }
        }
        (next_vertex, edges)
    }
}

impl fmt::Display for SpgTree {
    /// Writes the canonical decomposition expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &SpgTree, c: ComponentId, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t.nodes[c] {
                Node::Edge(e) => write!(f, "e({})", t.edge_names[e]),
                Node::Series(l, r) | Node::Parallel(l, r) => {
                    let tag = if matches!(t.nodes[c], Node::Series(..)) { 'S' } else { 'P' };
                    write!(f, "{tag}(")?;
                    go(t, l, f)?;
                    f.write_str(",")?;
                    go(t, r, f)?;
                    f.write_str(")")
                }
            }
        }
        go(self, self.root(), f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tree: SpgTree,
    seen: HashSet<String>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> SpgError {
        SpgError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), SpgError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", byte as char)))
        }
    }

    fn ident(&mut self) -> Result<String, SpgError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || matches!(self.src[self.pos], b'_' | b'-' | b'.'))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected edge id"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn expr(&mut self) -> Result<ComponentId, SpgError> {
        self.skip_ws();
        let id = self.tree.nodes.len();
        let first_edge = self.tree.edge_names.len();
        match self.src.get(self.pos) {
            Some(b'e') => {
                self.pos += 1;
                self.expect(b'(')?;
                let name = self.ident()?;
                if !self.seen.insert(name.clone()) {
                    return Err(SpgError::DuplicateEdge(name));
                }
                self.expect(b')')?;
                let e = self.tree.edge_names.len();
                self.tree.edge_names.push(name);
                self.tree.edge_component.push(id);
                self.tree.nodes.push(Node::Edge(e));
                self.tree.edge_ranges.push(e..e + 1);
            }
            Some(&tag @ (b'S' | b'P')) => {
                self.pos += 1;
                self.expect(b'(')?;
                // Reserve the slot so the node keeps its pre-order id.
                self.tree.nodes.push(Node::Edge(usize::MAX));
                self.tree.edge_ranges.push(0..0);
                let l = self.expr()?;
                self.expect(b',')?;
                let r = self.expr()?;
                self.expect(b')')?;
                self.tree.nodes[id] = if tag == b'S' {
                    Node::Series(l, r)
                } else {
                    Node::Parallel(l, r)
                };
            }
            _ => return Err(self.error("expected `e(`, `S(` or `P(`")),
        }
        self.tree.edge_ranges[id] = first_edge..self.tree.edge_names.len();
        Ok(id)
    }
}

/// A series-parallel graph together with the cost function of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    tree: SpgTree,
    costs: Vec<CostTable>,
    horizon: usize,
}

impl Network {
    pub fn new(tree: SpgTree, costs: Vec<CostTable>) -> Self {
        assert_eq!(tree.num_edges(), costs.len(), "one cost table per edge");
        let horizon = costs.iter().map(CostTable::horizon).min().unwrap_or(0);
        Network {
            tree,
            costs,
            horizon,
        }
    }

    /// Attaches cost tables given by edge name.
    pub fn with_costs(tree: SpgTree, costs: &BTreeMap<String, CostTable>) -> Result<Self, SpgError> {
        if let Some(unknown) = costs.keys().find(|k| tree.edge_index(k).is_none()) {
            return Err(SpgError::UnknownEdge(unknown.clone()));
        }
        let tables = tree
            .edge_names()
            .iter()
            .map(|name| costs.get(name).cloned().ok_or_else(|| SpgError::MissingCost(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Network::new(tree, tables))
    }

    pub fn tree(&self) -> &SpgTree {
        &self.tree
    }

    pub fn cost_table(&self, e: EdgeIdx) -> &CostTable {
        &self.costs[e]
    }

    pub fn cost_tables(&self) -> &[CostTable] {
        &self.costs
    }

    /// Largest player count every edge's table covers.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Social cost `sum_e c_e(loads[e])`.
    pub fn cost(&self, loads: &LoadProfile) -> CostValue {
        self.component_cost(loads, self.tree.root())
    }

    /// Cost of `loads` restricted to the edges of component `c`.
    pub fn component_cost(&self, loads: &LoadProfile, c: ComponentId) -> CostValue {
        self.tree
            .edges_of(c)
            .map(|e| self.costs[e].at(loads.get(e)))
            .sum()
    }

    pub fn scale(&self, factor: &crate::rational::Rational) -> Network {
        Network {
            tree: self.tree.clone(),
            costs: self.costs.iter().map(|t| t.scale(factor)).collect(),
            horizon: self.horizon,
        }
    }
}
