//! Centralized ground truth: MST under a strict order, spanning-tree test,
//! path maxima and the cycle property.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{CandidateMarking, EdgeId, TieBrokenWeight, VertexId, WeightedGraph};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: alloc::vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// Kruskal under an arbitrary key. With a strict order the result is the
/// unique MST. Edge ids are returned in ascending order.
pub fn mst_by_order<K: Ord>(g: &WeightedGraph, key: impl Fn(EdgeId) -> K) -> Result<Vec<EdgeId>> {
    let mut order: Vec<(K, EdgeId)> = (0..g.m()).map(|e| (key(e), e)).collect();
    order.sort();
    let mut uf = UnionFind::new(g.n());
    let mut tree = Vec::with_capacity(g.n().saturating_sub(1));
    for (_, e) in order {
        let (a, b) = g.endpoints(e);
        if uf.union(a, b) {
            tree.push(e);
        }
    }
    if uf.sets() != 1 {
        return Err(Error::NotConnected);
    }
    tree.sort_unstable();
    Ok(tree)
}

/// The unique MST under ω′ for marking `t`.
pub fn mst_oracle(g: &WeightedGraph, t: &CandidateMarking) -> Result<Vec<EdgeId>> {
    t.check(g)?;
    mst_by_order(g, |e| TieBrokenWeight::of_edge(g, t, e))
}

pub fn is_mst(g: &WeightedGraph, t: &CandidateMarking) -> Result<bool> {
    let tree = mst_oracle(g, t)?;
    Ok(tree.len() == t.count() && tree.iter().all(|&e| t.contains(e)))
}

/// Marked edges are acyclic and connect every vertex of `g`.
pub fn is_spanning_tree(g: &WeightedGraph, t: &CandidateMarking) -> bool {
    if t.len() != g.m() {
        return false;
    }
    let mut uf = UnionFind::new(g.n());
    for e in t.edges() {
        let (a, b) = g.endpoints(e);
        if !uf.union(a, b) {
            return false;
        }
    }
    uf.sets() == 1
}

/// Maximum weight on the `u`-`v` path of `tree`, found by walking the tree.
pub fn max_on_tree_path(
    tree: &[(VertexId, VertexId, TieBrokenWeight)],
    u: VertexId,
    v: VertexId,
) -> Result<TieBrokenWeight> {
    if u == v {
        return Err(Error::SameVertex);
    }
    let mut adj: BTreeMap<VertexId, Vec<(VertexId, TieBrokenWeight)>> = BTreeMap::new();
    for &(a, b, w) in tree {
        adj.entry(a).or_default().push((b, w));
        adj.entry(b).or_default().push((a, w));
    }
    for x in [u, v] {
        if !adj.contains_key(&x) {
            return Err(Error::UnknownVertex(x));
        }
    }
    // best[x] = max weight from u to x
    let mut best: BTreeMap<VertexId, Option<TieBrokenWeight>> = BTreeMap::new();
    best.insert(u, None);
    let mut stack = alloc::vec![u];
    while let Some(x) = stack.pop() {
        let here = best[&x];
        for &(y, w) in &adj[&x] {
            if !best.contains_key(&y) {
                let m = here.map_or(w, |h| h.max(w));
                if y == v {
                    return Ok(m);
                }
                best.insert(y, Some(m));
                stack.push(y);
            }
        }
    }
    Err(Error::NotConnected)
}

/// `e` is the unique ω′-maximum of some cycle: its endpoints are joined by
/// strictly lighter edges.
pub fn is_cycle_heavy(g: &WeightedGraph, t: &CandidateMarking, e: EdgeId) -> Result<bool> {
    t.check(g)?;
    if e >= g.m() {
        return Err(Error::Invalid(alloc::format!("unknown edge id {e}")));
    }
    let we = TieBrokenWeight::of_edge(g, t, e);
    let mut uf = UnionFind::new(g.n());
    for f in 0..g.m() {
        if TieBrokenWeight::of_edge(g, t, f) < we {
            let (a, b) = g.endpoints(f);
            uf.union(a, b);
        }
    }
    let (a, b) = g.endpoints(e);
    Ok(uf.find(a) == uf.find(b))
}

/// Tree edges of a marking, as `(u, v, ω′)` triples.
pub fn weighted_tree_edges(
    g: &WeightedGraph,
    t: &CandidateMarking,
    edges: &[EdgeId],
) -> Vec<(VertexId, VertexId, TieBrokenWeight)> {
    edges
        .iter()
        .map(|&e| {
            let edge = g.edge(e);
            (edge.u, edge.v, TieBrokenWeight::of_edge(g, t, e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        // a=0, b=1, c=2
        WeightedGraph::from_edges(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)]).unwrap()
    }

    #[test]
    fn triangle_mst() {
        let g = triangle();
        let t = CandidateMarking::empty(&g);
        assert_eq!(mst_oracle(&g, &t).unwrap(), [0, 1]);
        assert!(is_mst(&g, &CandidateMarking::from_edges(&g, [0, 1])).unwrap());
        assert!(!is_mst(&g, &CandidateMarking::from_edges(&g, [0, 2])).unwrap());
    }

    #[test]
    fn single_edge_and_disconnected() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 3)]).unwrap();
        assert_eq!(mst_oracle(&g, &CandidateMarking::empty(&g)).unwrap(), [0]);
        let split = WeightedGraph::from_edges(3, [(0, 1, 3)]).unwrap();
        assert_eq!(mst_oracle(&split, &CandidateMarking::empty(&split)), Err(Error::NotConnected));
        assert!(is_mst(&split, &CandidateMarking::empty(&split)).is_err());
    }

    #[test]
    fn tie_goes_to_marked_edge() {
        // w(ab) = w(ac) = 1, bc heavy; marking {ab} alone is not spanning
        let g = WeightedGraph::from_edges(3, [(0, 1, 1), (0, 2, 1), (1, 2, 9)]).unwrap();
        assert!(is_mst(&g, &CandidateMarking::from_edges(&g, [0, 1])).unwrap());
        // with only ac marked among the tied edges, the tie flips
        let t = CandidateMarking::from_edges(&g, [1]);
        assert_eq!(mst_oracle(&g, &t).unwrap(), [0, 1]);
        // a tie where ids would prefer the other edge
        let h = WeightedGraph::from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        assert!(is_mst(&h, &CandidateMarking::from_edges(&h, [1, 2])).unwrap());
    }

    #[test]
    fn spanning_tree_semantics() {
        let path = WeightedGraph::from_edges(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        assert!(is_spanning_tree(&path, &CandidateMarking::all(&path)));
        let two = WeightedGraph::from_edges(6, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)])
            .unwrap();
        assert!(!is_spanning_tree(&two, &CandidateMarking::from_edges(&two, [0, 1, 3, 4])));
        let cycle = WeightedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1))).unwrap();
        assert!(is_spanning_tree(&cycle, &CandidateMarking::from_edges(&cycle, [0, 1, 2, 3])));
        assert!(!is_spanning_tree(&cycle, &CandidateMarking::all(&cycle)));
    }

    #[test]
    fn path_maximum() {
        let w5 = TieBrokenWeight::new(5, true, VertexId(0), VertexId(1));
        let w7 = TieBrokenWeight::new(7, true, VertexId(1), VertexId(2));
        let tree = [(VertexId(0), VertexId(1), w5), (VertexId(1), VertexId(2), w7)];
        assert_eq!(max_on_tree_path(&tree, VertexId(0), VertexId(2)).unwrap(), w7);
        assert_eq!(max_on_tree_path(&tree, VertexId(0), VertexId(1)).unwrap(), w5);
        assert_eq!(max_on_tree_path(&tree, VertexId(1), VertexId(1)), Err(Error::SameVertex));
        assert_eq!(max_on_tree_path(&tree, VertexId(0), VertexId(9)), Err(Error::UnknownVertex(VertexId(9))));
    }

    #[test]
    fn cycle_heavy() {
        let g = triangle();
        let t = CandidateMarking::empty(&g);
        assert!(is_cycle_heavy(&g, &t, 2).unwrap());
        assert!(!is_cycle_heavy(&g, &t, 0).unwrap());
        let bridge = WeightedGraph::from_edges(4, [(0, 1, 1), (1, 2, 2), (0, 2, 3), (2, 3, 9)]).unwrap();
        assert!(!is_cycle_heavy(&bridge, &CandidateMarking::empty(&bridge), 3).unwrap());
    }
}
