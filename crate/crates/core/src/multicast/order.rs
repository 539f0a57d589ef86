//! The priority order derived from the predicted terminals: an MST over the
//! source and predictions on the metric closure, a DFS over it, and the
//! assignment of every vertex to its nearest prediction.

use num_traits::Zero;

use super::graph::{MulticastInstance, VertexId};
use crate::rational::Rational;

/// `π_η` over the source and the predictions, and the induced order `π` over
/// all vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityOrder {
    prediction_order: Vec<VertexId>,
    vertex_order: Vec<VertexId>,
    rank: Vec<usize>,
    nearest: Vec<VertexId>,
    mst_edges: Vec<(VertexId, VertexId)>,
    mst_cost: Rational,
}

impl PriorityOrder {
    /// `π_η`, starting at the source.
    pub fn prediction_order(&self) -> &[VertexId] {
        &self.prediction_order
    }

    /// `π` over all vertices.
    pub fn vertex_order(&self) -> &[VertexId] {
        &self.vertex_order
    }

    /// Position of `v` in `π`.
    pub fn rank(&self, v: VertexId) -> usize {
        self.rank[v]
    }

    /// The prediction (or the source) that `v` is attached to.
    pub fn nearest(&self, v: VertexId) -> VertexId {
        self.nearest[v]
    }

    /// MST edges over the source and predictions, as closure pairs `(min, max)`.
    pub fn mst_edges(&self) -> &[(VertexId, VertexId)] {
        &self.mst_edges
    }

    /// Total closure distance of the MST.
    pub fn mst_cost(&self) -> &Rational {
        &self.mst_cost
    }

    /// The given vertices sorted by `π`.
    pub fn sort(&self, vertices: &[VertexId]) -> Vec<VertexId> {
        let mut out = vertices.to_vec();
        out.sort_by_key(|&v| self.rank[v]);
        out
    }
}

/// Kruskal over the metric closure on `points`, ties broken by
/// `(distance, smaller id, larger id)`.
pub fn closure_mst(inst: &MulticastInstance, points: &[VertexId]) -> (Vec<(VertexId, VertexId)>, Rational) {
    let mut pairs = Vec::new();
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            pairs.push((inst.dist(a, b).clone(), a.min(b), a.max(b)));
        }
    }
    pairs.sort();
    let mut parent: Vec<usize> = (0..inst.num_vertices()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut edges = Vec::new();
    let mut cost = Rational::zero();
    for (d, a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            cost += d;
            edges.push((a, b));
        }
    }
    (edges, cost)
}

/// Builds the priority order for an instance.
pub fn prediction_order(inst: &MulticastInstance) -> PriorityOrder {
    let s = inst.source();
    let mut points = vec![s];
    points.extend_from_slice(inst.predictions());
    points.sort_unstable();
    let (mst_edges, mst_cost) = closure_mst(inst, &points);

    let n = inst.num_vertices();
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &(a, b) in &mst_edges {
        children[a].push(b);
        children[b].push(a);
    }
    for list in &mut children {
        list.sort_unstable();
    }
    // Preorder of the doubled tree's Euler tour equals the DFS preorder.
    let mut prediction_order = Vec::with_capacity(points.len());
    let mut visited = vec![false; n];
    let mut stack = vec![s];
    while let Some(v) = stack.pop() {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        prediction_order.push(v);
        for &c in children[v].iter().rev() {
            if !visited[c] {
                stack.push(c);
            }
        }
    }

    let mut eta_rank = vec![usize::MAX; n];
    for (i, &h) in prediction_order.iter().enumerate() {
        eta_rank[h] = i;
    }
    let closure = inst.metric_closure();
    let nearest: Vec<VertexId> = (0..n)
        .map(|v| closure.nearest(v, &points).expect("source is always a point").0)
        .collect();
    let mut vertex_order: Vec<VertexId> = (0..n).collect();
    vertex_order.sort_by_key(|&v| (eta_rank[nearest[v]], v));
    let mut rank = vec![0; n];
    for (i, &v) in vertex_order.iter().enumerate() {
        rank[v] = i;
    }
    PriorityOrder {
        prediction_order,
        vertex_order,
        rank,
        nearest,
        mst_edges,
        mst_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multicast::graph::WeightedEdge;
    use crate::rational::int;

    fn tree_instance(n: usize, edges: &[(usize, usize)], h: &[usize]) -> MulticastInstance {
        let names = (0..n).map(|i| if i == 0 { "s".into() } else { format!("v{i}") }).collect();
        let edges = edges
            .iter()
            .map(|&(u, v)| WeightedEdge { u, v, weight: int(1) })
            .collect();
        MulticastInstance::new(names, edges, 0, &[], h).unwrap()
    }

    #[test]
    fn only_source_predicted() {
        let g = tree_instance(3, &[(0, 1), (1, 2)], &[]);
        let order = prediction_order(&g);
        assert_eq!(order.prediction_order(), &[0]);
        assert_eq!(order.vertex_order(), &[0, 1, 2]);
    }

    #[test]
    fn line_visits_in_distance_order() {
        let g = tree_instance(3, &[(0, 1), (1, 2)], &[1, 2]);
        let order = prediction_order(&g);
        assert_eq!(order.prediction_order(), &[0, 1, 2]);
        assert_eq!(order.mst_edges(), &[(0, 1), (1, 2)]);
        assert_eq!(order.mst_cost(), &int(2));
    }

    #[test]
    fn star_of_paths_is_visited_branch_by_branch() {
        // The tree drawn with predictions labelled 1..12 in DFS order; ids
        // are scrambled so that ascending-id child order is what recovers it.
        let tree = [
            (0, 1), (0, 8), (0, 12), (1, 2), (1, 4), (1, 7), (2, 3), (4, 5), (4, 6),
            (8, 9), (8, 10), (10, 11),
        ];
        let g = tree_instance(13, &tree, &(1..=12).collect::<Vec<_>>());
        let order = prediction_order(&g);
        assert_eq!(order.prediction_order(), &(0..=12).collect::<Vec<_>>()[..]);
        for v in 0..13 {
            assert_eq!(order.nearest(v), v);
        }
    }

    #[test]
    fn vertices_follow_their_nearest_prediction() {
        // s - a - b - c with predictions {c}; a is closer to s, b to c.
        let g = tree_instance(4, &[(0, 1), (1, 2), (2, 3)], &[3]);
        let order = prediction_order(&g);
        assert_eq!(order.prediction_order(), &[0, 3]);
        assert_eq!(order.nearest(1), 0);
        assert_eq!(order.nearest(2), 3);
        assert_eq!(order.vertex_order(), &[0, 1, 2, 3]);
        // Equidistant vertices go to the smaller id.
        let g = tree_instance(3, &[(0, 1), (1, 2)], &[2]);
        assert_eq!(prediction_order(&g).nearest(1), 0);
    }
}
