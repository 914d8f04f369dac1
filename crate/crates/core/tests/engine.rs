mod common;

use common::graph_and_marking;
use mstv_core::bits::Bits;
use mstv_core::sim::{run, Ctx, EngineConfig, NodeProtocol, Wakeup};
use mstv_core::Error;
use proptest::prelude::*;

/// Floods a token, then stops. Each node forwards once on every port.
struct Flood {
    sent: bool,
}

impl NodeProtocol for Flood {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> mstv_core::Result<()> {
        if !self.sent {
            self.sent = true;
            let id = ctx.id().0 as u64;
            for p in 0..ctx.degree() {
                let mut b = Bits::new();
                b.push_uint(id, ctx.widths().id)?;
                ctx.send(p, b)?;
            }
        }
        ctx.halt();
        Ok(())
    }
}

struct Shout;

impl NodeProtocol for Shout {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> mstv_core::Result<()> {
        let too_long = Bits::from_bools(vec![true; ctx.budget() as usize + 1]);
        if ctx.degree() > 0 {
            ctx.send(0, too_long)?;
        }
        ctx.halt();
        Ok(())
    }
}

#[test]
fn over_budget_payload_is_an_error() {
    let g = mstv_core::WeightedGraph::from_edges(2, [(0, 1, 1)]).unwrap();
    let t = mstv_core::CandidateMarking::empty(&g);
    let err = run(&g, &t, &EngineConfig::for_graph(&g), |_| Shout).err().unwrap();
    assert!(matches!(err, Error::CongestBudget { .. }), "{err:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_are_deterministic_and_metrics_agree_with_traces((g, t) in graph_and_marking(25, 100), simultaneous in any::<bool>()) {
        let mut cfg = EngineConfig::for_graph(&g);
        if simultaneous {
            cfg.wakeup = Wakeup::Simultaneous;
        }
        let a = run(&g, &t, &cfg, |_| Flood { sent: false }).unwrap();
        let b = run(&g, &t, &cfg, |_| Flood { sent: false }).unwrap();
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(&a.metrics, &b.metrics);
        prop_assert_eq!(a.metrics.messages as usize, a.trace.len());
        prop_assert_eq!(a.metrics.messages as usize, 2 * g.m());
        if let Some(last) = a.trace.messages.last() {
            prop_assert_eq!(a.metrics.rounds, last.round + 1);
        }
        prop_assert!(a.trace.messages.windows(2).all(|w| (w[0].round, w[0].src, w[0].dst) <= (w[1].round, w[1].src, w[1].dst)));
        prop_assert!(a.metrics.max_payload_bits <= cfg.bits as usize);
        if !simultaneous && g.n() > 1 {
            // wake-on-receipt flood reaches everyone by eccentricity
            let ecc = g.bfs_distances(0).into_iter().map(|d| d.unwrap()).max().unwrap();
            prop_assert_eq!(a.metrics.rounds, u64::from(ecc) + 1);
        }
        for m in &a.trace.messages {
            prop_assert!(g.edge_between(m.src, m.dst).is_some());
            prop_assert_eq!(m.payload.reader().read_uint(g.widths().id).unwrap(), u64::from(m.src.0));
        }
    }

    #[test]
    fn round_limit_is_enforced((g, t) in graph_and_marking(12, 5)) {
        prop_assume!(g.n() > 2);
        let mut cfg = EngineConfig::for_graph(&g);
        cfg.max_rounds = 1;
        let ecc = g.bfs_distances(0).into_iter().map(|d| d.unwrap()).max().unwrap();
        let result = run(&g, &t, &cfg, |_| Flood { sent: false });
        if ecc >= 1 {
            prop_assert!(result.is_err());
        }
    }
}
