mod common;

use common::{connected_graph, graph_and_marking, spanning_trees};
use mstv_core::oracle::{is_mst, is_spanning_tree, mst_by_order, mst_oracle};
use mstv_core::{CandidateMarking, TieBrokenWeight, VertexId, WeightedGraph};
use proptest::prelude::*;

fn weight_of(g: &WeightedGraph, es: &[usize]) -> u64 {
    es.iter().map(|&e| g.edge(e).weight).sum()
}

#[test]
fn every_marking_of_small_labeled_graphs() {
    // all graphs on 4 labeled vertices, two weightings, all markings
    let pairs: Vec<(u32, u32)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    for gmask in 0u32..1 << pairs.len() {
        for weighting in 0..2u64 {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| gmask >> i & 1 == 1)
                .map(|(i, &(a, b))| (a, b, if weighting == 0 { i as u64 % 2 } else { i as u64 }));
            let g = WeightedGraph::from_edges(4, edges).unwrap();
            if !g.is_connected() {
                continue;
            }
            let best = spanning_trees(&g).iter().map(|t| weight_of(&g, t)).min().unwrap();
            for tmask in 0u32..1 << g.m() {
                let t = CandidateMarking::from_mask((0..g.m()).map(|e| tmask >> e & 1 == 1).collect());
                let expect = is_spanning_tree(&g, &t) && weight_of(&g, &t.edges().collect::<Vec<_>>()) == best;
                assert_eq!(is_mst(&g, &t).unwrap(), expect, "graph {gmask:b} marking {tmask:b}");
            }
        }
    }
}

#[test]
fn tie_broken_order_is_lexicographic() {
    let a = TieBrokenWeight::new(3, true, VertexId(4), VertexId(1));
    assert_eq!((a.id_min, a.id_max, a.unmarked), (VertexId(1), VertexId(4), false));
    assert!(a < TieBrokenWeight::new(3, false, VertexId(0), VertexId(1)));
    assert!(a < TieBrokenWeight::new(4, true, VertexId(0), VertexId(1)));
    assert!(a < TieBrokenWeight::new(3, true, VertexId(1), VertexId(5)));
    assert!(TieBrokenWeight::SENTINEL < TieBrokenWeight::new(0, true, VertexId(0), VertexId(1)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tie_broken_weights_are_distinct_on_a_graph((g, t) in graph_and_marking(12, 4)) {
        let mut ws: Vec<_> = (0..g.m()).map(|e| TieBrokenWeight::of_edge(&g, &t, e)).collect();
        ws.sort();
        prop_assert!(ws.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn mst_matches_brute_force_minimum((g, t) in graph_and_marking(8, 3)) {
        prop_assume!(g.m() <= 14);
        let best = spanning_trees(&g).iter().map(|es| weight_of(&g, es)).min().unwrap();
        let marked: Vec<usize> = t.edges().collect();
        let expect = is_spanning_tree(&g, &t) && weight_of(&g, &marked) == best;
        prop_assert_eq!(is_mst(&g, &t).unwrap(), expect);
        let oracle = mst_oracle(&g, &t).unwrap();
        prop_assert_eq!(weight_of(&g, &oracle), best);
    }

    #[test]
    fn oracle_ignores_edge_order(g in connected_graph(20, 5), rot in 0usize..40) {
        let t = CandidateMarking::empty(&g);
        let tree = mst_oracle(&g, &t).unwrap();
        let m = g.m();
        let shifted: Vec<(VertexId, VertexId, u64)> =
            (0..m).map(|i| { let e = g.edge((i + rot) % m.max(1)); (e.u, e.v, e.weight) }).collect();
        let h = WeightedGraph::with_weight_bound(g.ids().iter().copied(), shifted, g.weight_bound()).unwrap();
        let pairs = |g: &WeightedGraph, es: Vec<usize>| {
            let mut v: Vec<_> = es.into_iter().map(|e| (g.edge(e).id_min(), g.edge(e).id_max())).collect();
            v.sort();
            v
        };
        prop_assert_eq!(pairs(&g, tree), pairs(&h, mst_oracle(&h, &CandidateMarking::empty(&h)).unwrap()));
    }

    #[test]
    fn marked_mst_is_preferred_among_ties((g, t) in graph_and_marking(10, 1)) {
        let tree = mst_oracle(&g, &t).unwrap();
        let by_weight = mst_by_order(&g, |e| g.edge(e).weight).unwrap();
        prop_assert_eq!(weight_of(&g, &tree), weight_of(&g, &by_weight));
        if is_mst(&g, &t).unwrap() {
            prop_assert!(tree.iter().all(|&e| t.contains(e)));
        }
    }
}
