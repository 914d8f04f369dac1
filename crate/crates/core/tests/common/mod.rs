#![allow(dead_code)]

use mstv_core::{CandidateMarking, VertexId, WeightedGraph};
use proptest::prelude::*;

/// Connected graph on `0..n`: a random tree plus chords, weights in `0..=wmax`.
pub fn connected_graph(max_n: u32, wmax: u64) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n).prop_flat_map(move |n| {
        let parents: Vec<BoxedStrategy<u32>> = (1..n).map(|i| (0..i).boxed()).collect();
        let chords = proptest::collection::vec((0..n, 0..n), 0..(2 * n as usize));
        let weights = proptest::collection::vec(0..=wmax, 3 * n as usize);
        (Just(n), parents, chords, weights).prop_map(move |(n, parents, chords, weights)| {
            let mut seen = std::collections::BTreeSet::new();
            let mut edges = Vec::new();
            let pairs = parents.iter().enumerate().map(|(i, &p)| (i as u32 + 1, p)).chain(chords);
            for (a, b) in pairs {
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    edges.push((VertexId(a), VertexId(b), weights[edges.len() % weights.len()]));
                }
            }
            WeightedGraph::with_weight_bound((0..n).map(VertexId), edges, wmax.max(1)).unwrap()
        })
    })
}

pub fn graph_and_marking(max_n: u32, wmax: u64) -> impl Strategy<Value = (WeightedGraph, CandidateMarking)> {
    connected_graph(max_n, wmax).prop_flat_map(|g| {
        let m = g.m();
        (Just(g), proptest::collection::vec(any::<bool>(), m)).prop_map(|(g, mask)| (g, CandidateMarking::from_mask(mask)))
    })
}

/// Every spanning tree of `g`, as edge-id sets.
pub fn spanning_trees(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let m = g.m();
    let need = g.n() - 1;
    (0u64..1 << m)
        .filter(|mask| mask.count_ones() as usize == need)
        .map(|mask| (0..m).filter(|e| mask >> e & 1 == 1).collect::<Vec<_>>())
        .filter(|es| mstv_core::oracle::is_spanning_tree(g, &CandidateMarking::from_edges(g, es.iter().copied())))
        .collect()
}
