mod common;

use common::{connected_graph, graph_and_marking};
use mstv_core::bits::Bits;
use mstv_core::fragments::{dom_part, dom_part_reference, Mfc};
use mstv_core::primitives::{build_bfs, convergecast_sum, exchange_ids, upcast};
use mstv_core::sim::{EngineConfig, Network, Wakeup};
use mstv_core::CandidateMarking;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bfs_matches_centralized_distances(g in connected_graph(40, 10), src in 0usize..40) {
        let src = src % g.n();
        let t = CandidateMarking::empty(&g);
        let mut net = Network::new(&g, &t, EngineConfig::for_graph(&g)).unwrap();
        let bfs = build_bfs(&mut net, "bfs", src).unwrap();
        let dist = g.bfs_distances(src);
        for i in 0..g.n() {
            prop_assert_eq!(Some(bfs.depth[i]), dist[i]);
            if let Some(port) = bfs.forest.parent[i] {
                let p = g.ports(i)[port].neighbor;
                prop_assert_eq!(bfs.depth[p] + 1, bfs.depth[i]);
            }
        }
        prop_assert_eq!(bfs.root, src);
        prop_assert_eq!(bfs.n, g.n() as u64);
        let d = bfs.height;
        let diam = g.diameter().unwrap();
        prop_assert!(d <= diam && diam <= 2 * d);
    }

    #[test]
    fn convergecast_sends_one_message_per_tree_edge(g in connected_graph(40, 10)) {
        let t = CandidateMarking::empty(&g);
        let mut net = Network::new(&g, &t, EngineConfig::for_graph(&g)).unwrap();
        let bfs = build_bfs(&mut net, "bfs", 0).unwrap();
        let local: Vec<u64> = (0..g.n() as u64).collect();
        prop_assume!(g.n() > 1);
        let width = 2 * g.widths().id;
        let sums = convergecast_sum(&mut net, "sum", &bfs.forest, &local, width).unwrap();
        prop_assert_eq!(sums[0], local.iter().sum::<u64>());
        prop_assert_eq!(net.metrics().phases["sum"].messages, g.n() as u64 - 1);
    }

    #[test]
    fn upcast_is_pipelined(g in connected_graph(40, 10), per_node in proptest::collection::vec(0usize..3, 40)) {
        let t = CandidateMarking::empty(&g);
        let mut net = Network::new(&g, &t, EngineConfig::for_graph(&g)).unwrap();
        let bfs = build_bfs(&mut net, "bfs", 0).unwrap();
        let items: Vec<Vec<Bits>> = (0..g.n())
            .map(|i| (0..per_node[i]).map(|j| { let mut b = Bits::new(); b.push_uint((i * 3 + j) as u64, 10).unwrap(); b }).collect())
            .collect();
        let total: usize = items.iter().map(Vec::len).sum();
        let mut expect: Vec<Bits> = items.iter().flatten().cloned().collect();
        let before = net.clock();
        let up = upcast(&mut net, "up", &bfs.forest, items, None).unwrap();
        let rounds = net.clock() - before;
        let mut got = up.at_root[0].clone();
        got.sort();
        expect.sort();
        prop_assert_eq!(got, expect);
        prop_assert!(rounds <= u64::from(bfs.height) + total as u64 + 3, "rounds {} d {} k {}", rounds, bfs.height, total);
    }

    #[test]
    fn distributed_partition_matches_reference((g, t) in graph_and_marking(40, 6), k in 1u64..8, simultaneous in any::<bool>()) {
        let mut cfg = EngineConfig::for_graph(&g);
        if simultaneous {
            cfg.wakeup = Wakeup::Simultaneous;
        }
        let mut net = Network::new(&g, &t, cfg).unwrap();
        let nbr = exchange_ids(&mut net, "ids").unwrap();
        let fv = dom_part(&mut net, "part", &nbr, k).unwrap();
        let mfc = Mfc::from_views(&g, &fv);
        prop_assert_eq!(&mfc, &dom_part_reference(&g, &t, k).unwrap());
        prop_assert_eq!(mfc.check(&g, &t, k), Ok(()));
    }
}
