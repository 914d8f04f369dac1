mod common;

use common::graph_and_marking;
use mstv_core::labeling::{decode, encode, label_bits, MaxLabel};
use mstv_core::oracle::{is_mst, max_on_tree_path, mst_oracle};
use mstv_core::sim::{EngineConfig, Wakeup};
use mstv_core::verify::verify_mst_distributed;
use mstv_core::{CandidateMarking, TieBrokenWeight, VertexId};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn verdict_matches_oracle((g, t) in graph_and_marking(30, 4), simultaneous in any::<bool>()) {
        let mut cfg = EngineConfig::for_graph(&g);
        if simultaneous {
            cfg.wakeup = Wakeup::Simultaneous;
        }
        let bits = cfg.bits as usize;
        let out = verify_mst_distributed(&g, &t, cfg).unwrap();
        prop_assert_eq!(out.verdict, is_mst(&g, &t).unwrap());
        prop_assert!(out.outputs.iter().all(|&o| o == out.verdict));
        prop_assert_eq!(out.verdict, out.rejected_at.is_none());
        prop_assert!(out.metrics.max_payload_bits <= bits);
        prop_assert_eq!(out.metrics.messages as usize, out.trace.len());
        if let Some(p) = &out.partition {
            prop_assert_eq!(p.check(&g, &t, out.stats.k), Ok(()));
        }
    }

    #[test]
    fn oracle_tree_is_always_accepted(g in common::connected_graph(40, 1000)) {
        let t = CandidateMarking::from_edges(&g, mst_oracle(&g, &CandidateMarking::empty(&g)).unwrap());
        let out = verify_mst_distributed(&g, &t, EngineConfig::for_graph(&g)).unwrap();
        prop_assert!(out.verdict);
        prop_assert!(out.stats.fragments * out.stats.k <= g.n() as u64 || g.n() as u64 <= out.stats.k);
    }

    #[test]
    fn labels_answer_every_pair(g in common::connected_graph(64, 50)) {
        let t = CandidateMarking::from_edges(&g, mst_oracle(&g, &CandidateMarking::empty(&g)).unwrap());
        let tree: Vec<(VertexId, VertexId, TieBrokenWeight)> = t
            .edges()
            .map(|e| { let ed = g.edge(e); (ed.u, ed.v, TieBrokenWeight::of_edge(&g, &t, e)) })
            .collect();
        let labels = encode(g.ids(), &tree).unwrap();
        let w = g.widths();
        let wire: Vec<MaxLabel> = g.ids().iter().map(|v| {
            let b = labels[v].to_bits(&w).unwrap();
            prop_assert_eq!(b.len(), label_bits(&labels[v], &w));
            Ok(MaxLabel::from_bits(&w, &mut b.reader()).unwrap())
        }).collect::<Result<_, TestCaseError>>()?;
        for a in 0..g.n() {
            for b in a + 1..g.n() {
                prop_assert_eq!(decode(&wire[a], &wire[b]).unwrap(), max_on_tree_path(&tree, g.id(a), g.id(b)).unwrap());
            }
        }
    }
}
