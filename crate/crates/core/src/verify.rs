//! The three-phase distributed MST verification protocol.
//!
//! Phase 1 builds a BFS tree from the source, splits the graph into MST
//! fragments and has every vertex check its own fragment edges. Phase 2
//! collects the fragment-level tree `T_F` at the source and checks its shape.
//! Phase 3 labels `T_F`, ships each fragment its label, and every vertex
//! tests its non-candidate edges to other fragments against the path maximum
//! decoded from two labels.
//!
//! Every check ends with an agreement round over the BFS tree, so all
//! vertices stop together with the same output.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::fragments::{dom_part, exchange_fragment_ids, internal_edges_ok, FragmentView, Mfc};
use crate::graph::{CandidateMarking, TieBrokenWeight, VertexId, WeightedGraph, Widths};
use crate::labeling::{self, MaxLabel};
use crate::oracle::UnionFind;
use crate::primitives::{
    broadcast, build_bfs, convergecast_sum, downcast, elect_leader, exchange, exchange_ids, synchronized_release,
    upcast, upward, BfsTree,
};
use crate::sim::{EngineConfig, Metrics, Network, RoundTrace, Wakeup};

/// Size parameters observed during a run.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct RunStats {
    pub n: u64,
    /// Height of the BFS tree from the source.
    pub depth: u32,
    pub k: u64,
    pub fragments: u64,
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    /// Output bit of every vertex, by vertex index.
    pub outputs: Vec<bool>,
    pub verdict: bool,
    pub rejected_at: Option<&'static str>,
    pub metrics: Metrics,
    pub trace: RoundTrace,
    pub stats: RunStats,
    /// The fragments found in phase 1, if the run got that far.
    pub partition: Option<Mfc>,
}

/// `⌈√n⌉`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let r = n.isqrt();
    if r * r == n { r } else { r + 1 }
}

/// Fragment size parameter used in phase 1.
pub fn fragment_parameter(n: u64, depth: u32) -> u64 {
    ceil_sqrt(n).max(u64::from(depth)).max(1)
}

/// True iff `edges` form a spanning tree on `f` fragment vertices.
pub fn check_tree_at_root(edges: &[(VertexId, VertexId)], f: u64) -> bool {
    if edges.len() as u64 + 1 != f {
        return false;
    }
    let nodes: BTreeSet<VertexId> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    if f > 1 && nodes.len() as u64 != f {
        return false;
    }
    let index: Vec<VertexId> = nodes.into_iter().collect();
    let pos = |v: VertexId| index.binary_search(&v).unwrap_or(0);
    let mut uf = UnionFind::new(index.len());
    edges.iter().all(|&(a, b)| uf.union(pos(a), pos(b)))
}

/// Whether vertex `i` is the one that reports the edge behind `port`:
/// marked, between fragments, and on the side with the smaller fragment id.
fn counts_edge(net: &Network<'_>, fv: &[FragmentView], nbr_fid: &[Vec<VertexId>], i: usize, port: usize) -> bool {
    net.view(i).ports[port].marked && fv[i].fid < nbr_fid[i][port]
}

/// Convergecast of the number of marked inter-fragment edges; the total is
/// returned at the BFS root.
pub fn count_inter_fragment_edges(
    net: &mut Network<'_>,
    phase: &str,
    bfs: &BfsTree,
    fv: &[FragmentView],
    nbr_fid: &[Vec<VertexId>],
) -> Result<u64> {
    let local: Vec<u64> = (0..net.n())
        .map(|i| (0..net.view(i).ports.len()).filter(|&p| counts_edge(net, fv, nbr_fid, i, p)).count() as u64)
        .collect();
    let width = 2 * net.widths().id;
    Ok(convergecast_sum(net, phase, &bfs.forest, &local, width)?[bfs.root])
}

/// AND of `ok` over the BFS tree, then broadcast of the result. Returns what
/// every vertex learned.
fn agree(net: &mut Network<'_>, phase: &str, bfs: &BfsTree, ok: &[bool]) -> Result<Vec<bool>> {
    let all = upward(net, phase, &bfs.forest, |i, kids| {
        Ok(Bits::from_bools([ok[i] && kids.iter().all(|(_, m)| m.get(0))]))
    })?;
    announce(net, phase, bfs, all[bfs.root].get(0))
}

/// Broadcast of one bit from the BFS root.
fn announce(net: &mut Network<'_>, phase: &str, bfs: &BfsTree, bit: bool) -> Result<Vec<bool>> {
    let mut start = alloc::vec![None; net.n()];
    start[bfs.root] = Some(Bits::from_bools([bit]));
    let got = broadcast(net, phase, &bfs.forest, &start)?;
    Ok(got.iter().map(|b| b.as_ref().is_some_and(|b| b.get(0))).collect())
}

/// Sends each leader's label across its fragment tree.
fn flood_fragments(net: &mut Network<'_>, phase: &str, fv: &[FragmentView], at_leader: &[Option<Bits>]) -> Result<Vec<Option<Bits>>> {
    let n = net.n();
    let mut got: Vec<Option<Bits>> = at_leader.to_vec();
    let awake: Vec<bool> = at_leader.iter().map(Option::is_some).collect();
    net.run_link_stage(phase, &awake, |i, ctx| {
        let mut forward: Option<(Bits, Option<usize>)> = None;
        if ctx.round() == 0 {
            if let Some(b) = &at_leader[i] {
                forward = Some((b.clone(), None));
            }
        }
        for (p, m) in ctx.inbox().iter().enumerate() {
            if let Some(m) = m {
                got[i] = Some(m.clone());
                forward = Some((m.clone(), Some(p)));
            }
        }
        if let Some((b, from)) = forward {
            for &p in &fv[i].ports {
                if Some(p) != from {
                    ctx.send(p, &b)?;
                }
            }
        }
        ctx.halt();
        Ok(())
    })?;
    debug_assert_eq!(got.len(), n);
    Ok(got)
}

fn encode_tf_edge(a: VertexId, b: VertexId, w: TieBrokenWeight, widths: &Widths) -> Result<Bits> {
    let mut bits = Bits::new();
    bits.push_uint(u64::from(a.0), widths.id)?;
    bits.push_uint(u64::from(b.0), widths.id)?;
    w.encode(widths, &mut bits)?;
    Ok(bits)
}

fn decode_tf_edge(bits: &Bits, widths: &Widths) -> Result<(VertexId, VertexId, TieBrokenWeight)> {
    let mut r = bits.reader();
    let a = VertexId(r.read_uint(widths.id)? as u32);
    let b = VertexId(r.read_uint(widths.id)? as u32);
    Ok((a, b, TieBrokenWeight::decode(widths, &mut r)?))
}

struct Rejected {
    step: &'static str,
    outputs: Vec<bool>,
}

/// Runs the whole protocol on `g` with candidate marking `t`.
pub fn verify_mst_distributed(g: &WeightedGraph, t: &CandidateMarking, cfg: EngineConfig) -> Result<VerifyOutcome> {
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let mut net = Network::new(g, t, cfg)?;
    let mut stats = RunStats::default();
    let mut partition = None;
    let result = run_phases(&mut net, &mut stats, &mut partition);
    let (metrics, trace) = net.finish();
    let (outputs, rejected_at) = match result? {
        Ok(outputs) => (outputs, None),
        Err(r) => (r.outputs, Some(r.step)),
    };
    Ok(VerifyOutcome { verdict: outputs.iter().all(|&a| a), outputs, rejected_at, metrics, trace, stats, partition })
}

/// Runs the protocol without the connectivity precondition. The verdict is
/// `None` if the run stopped on an error; the trace covers what was sent.
pub(crate) fn execute_unchecked(g: &WeightedGraph, t: &CandidateMarking, cfg: EngineConfig) -> Result<(Option<bool>, RoundTrace)> {
    let mut net = Network::new(g, t, cfg)?;
    let result = run_phases(&mut net, &mut RunStats::default(), &mut None);
    let (_, trace) = net.finish();
    Ok((result.ok().map(|r| r.is_ok()), trace))
}

fn run_phases(
    net: &mut Network<'_>,
    stats: &mut RunStats,
    partition: &mut Option<Mfc>,
) -> Result<core::result::Result<Vec<bool>, Rejected>> {
    let n = net.n();
    let w = net.widths();
    let source = match net.config().wakeup {
        Wakeup::SingleSource(s) => net.graph().index_of(s).ok_or(Error::UnknownVertex(s))?,
        Wakeup::Simultaneous => {
            let leader = elect_leader(net, "elect")?;
            net.graph().index_of(leader[0]).ok_or(Error::UnknownVertex(leader[0]))?
        }
    };
    let check = |step: &'static str, outputs: Vec<bool>| {
        if outputs.iter().all(|&a| a) {
            Ok(outputs)
        } else {
            Err(Rejected { step, outputs })
        }
    };

    // 1.a
    let bfs = build_bfs(net, "1.a", source)?;
    let mut nd = Bits::new();
    nd.push_uint(bfs.n, w.id)?;
    nd.push_uint(u64::from(bfs.height), w.id)?;
    let release = synchronized_release(net, "1.a", &bfs, &nd)?;
    let nbr = exchange_ids(net, "1.a")?;
    let ks: Vec<u64> = release
        .values
        .iter()
        .map(|v| {
            let mut r = v.reader();
            Ok(fragment_parameter(r.read_uint(w.id)?, r.read_uint(w.id)? as u32))
        })
        .collect::<Result<_>>()?;
    let k = ks[source];
    *stats = RunStats { n: bfs.n, depth: bfs.height, k, fragments: 0 };

    // 1.b
    let fv = dom_part(net, "1.b", &nbr, k)?;
    *partition = Some(Mfc::from_views(net.graph(), &fv));
    stats.fragments = fv.iter().enumerate().filter(|(i, f)| f.is_leader(net.view(*i).id)).count() as u64;

    // 1.c, 1.d, 1.e
    let nbr_fid = exchange_fragment_ids(net, "1.c", &fv)?;
    let ok = internal_edges_ok(net.views(), &fv, &nbr_fid);
    if let Err(r) = check("1.e", agree(net, "1.e", &bfs, &ok)?) {
        return Ok(Err(r));
    }

    // 2.a
    let leaders: Vec<u64> = (0..n).map(|i| u64::from(fv[i].is_leader(net.view(i).id))).collect();
    let f = convergecast_sum(net, "2.a", &bfs.forest, &leaders, w.id)?[bfs.root];

    // 2.b
    let count = count_inter_fragment_edges(net, "2.b", &bfs, &fv, &nbr_fid)?;
    if let Err(r) = check("2.b", announce(net, "2.b", &bfs, count + 1 == f)?) {
        return Ok(Err(r));
    }

    // 2.c
    let items: Vec<Vec<Bits>> = (0..n)
        .map(|i| {
            let view = net.view(i);
            (0..view.ports.len())
                .filter(|&p| counts_edge(net, &fv, &nbr_fid, i, p))
                .map(|p| {
                    let tw = TieBrokenWeight::new(view.ports[p].weight, true, view.id, nbr[i][p]);
                    encode_tf_edge(fv[i].fid, nbr_fid[i][p], tw, &w)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let collected = upcast(net, "2.c", &bfs.forest, items, None)?;
    let tf: Vec<(VertexId, VertexId, TieBrokenWeight)> =
        collected.at_root[bfs.root].iter().map(|b| decode_tf_edge(b, &w)).collect::<Result<_>>()?;

    // 2.d
    let pairs: Vec<(VertexId, VertexId)> = tf.iter().map(|&(a, b, _)| (a, b)).collect();
    if let Err(r) = check("2.d", announce(net, "2.d", &bfs, check_tree_at_root(&pairs, f))?) {
        return Ok(Err(r));
    }

    // 3.a
    let keys: Vec<Option<u64>> =
        (0..n).map(|i| fv[i].is_leader(net.view(i).id).then_some(u64::from(fv[i].fid.0))).collect();
    let mut key_items = Vec::with_capacity(n);
    for key in &keys {
        let mut v = Vec::new();
        if let Some(key) = key {
            let mut b = Bits::new();
            b.push_uint(*key, w.id)?;
            v.push(b);
        }
        key_items.push(v);
    }
    let registered = upcast(net, "3.a", &bfs.forest, key_items, Some(w.id))?;
    let fids: Vec<VertexId> = registered.at_root[bfs.root]
        .iter()
        .map(|b| Ok(VertexId(b.reader().read_uint(w.id)? as u32)))
        .collect::<Result<_>>()?;

    // 3.b
    let labels = labeling::encode(&fids, &tf)?;
    let outgoing: Vec<(u64, Bits)> = labels
        .iter()
        .map(|(fid, l)| Ok((u64::from(fid.0), l.to_bits(&w)?)))
        .collect::<Result<_>>()?;
    let delivered = downcast(net, "3.b", &bfs.forest, &registered.routes, &keys, bfs.root, w.id, outgoing)?;

    // 3.c
    let at_leader: Vec<Option<Bits>> = delivered.into_iter().map(|mut d| d.pop()).collect();
    let own_label = flood_fragments(net, "3.c", &fv, &at_leader)?;
    let own_label: Vec<MaxLabel> = own_label
        .iter()
        .map(|b| MaxLabel::from_bits(&w, &mut b.as_ref().ok_or(Error::Decode("missing label"))?.reader()))
        .collect::<Result<_>>()?;

    // 3.d
    let outside = |i: usize, p: usize, views: &Network<'_>| !views.view(i).ports[p].marked && nbr_fid[i][p] != fv[i].fid;
    let mut sends = Vec::with_capacity(n);
    for (i, label) in own_label.iter().enumerate() {
        let b = label.to_bits(&w)?;
        sends.push((0..net.view(i).ports.len()).filter(|&p| outside(i, p, net)).map(|p| (p, b.clone())).collect::<Vec<_>>());
    }
    let across = exchange(net, "3.d", |i| Ok(core::mem::take(&mut sends[i])))?;

    // 3.e
    let mut ok = alloc::vec![true; n];
    for i in 0..n {
        let view = net.view(i);
        for p in 0..view.ports.len() {
            if !outside(i, p, net) {
                continue;
            }
            let theirs = across[i][p].as_ref().ok_or(Error::Decode("missing neighbor label"))?;
            let theirs = MaxLabel::from_bits(&w, &mut theirs.reader())?;
            let path_max = labeling::decode(&own_label[i], &theirs)?;
            let tw = TieBrokenWeight::new(view.ports[p].weight, false, view.id, nbr[i][p]);
            ok[i] &= tw > path_max;
        }
    }
    Ok(check("3.e", agree(net, "3.e", &bfs, &ok)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{is_mst, mst_oracle};
    use crate::primitives::exchange_ids;
    use crate::testutil::random_connected;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run(g: &WeightedGraph, t: &CandidateMarking) -> VerifyOutcome {
        let out = verify_mst_distributed(g, t, EngineConfig::for_graph(g)).unwrap();
        assert!(out.outputs.iter().all(|&a| a == out.verdict));
        assert_eq!(out.rejected_at.is_some(), !out.verdict);
        assert!(out.metrics.max_payload_bits <= crate::sim::default_bits(g) as usize);
        out
    }

    fn triangle() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 1), (1, 2, 2), (0, 2, 3)]).unwrap()
    }

    #[test]
    fn triangle_markings() {
        let g = triangle();
        assert!(run(&g, &CandidateMarking::from_edges(&g, [0, 1])).verdict);
        let bad = run(&g, &CandidateMarking::from_edges(&g, [0, 2]));
        assert!(!bad.verdict);
        assert!(matches!(bad.rejected_at, Some(s) if s.starts_with('1') || s.starts_with('3')));
    }

    #[test]
    fn cycle_markings() {
        let n = 9;
        let g = WeightedGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, u64::from(i * 5 % 11)))).unwrap();
        let heaviest = (0..g.m()).max_by_key(|&e| (g.edge(e).weight, g.edge(e).id_min(), g.edge(e).id_max())).unwrap();
        let t = CandidateMarking::from_edges(&g, (0..g.m()).filter(|&e| e != heaviest));
        assert!(run(&g, &t).verdict);
        let full = run(&g, &CandidateMarking::all(&g));
        assert!(matches!(full.rejected_at, Some("2.b" | "1.e")));
    }

    #[test]
    fn tree_check_examples() {
        let (a, b, c, d) = (VertexId(1), VertexId(4), VertexId(9), VertexId(12));
        assert!(check_tree_at_root(&[(a, b), (b, c)], 3));
        assert!(!check_tree_at_root(&[(a, b), (a, b)], 3));
        assert!(check_tree_at_root(&[], 1));
        assert!(!check_tree_at_root(&[(a, b)], 3));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ids = [a, b, c, d];
        for _ in 0..500 {
            let edges: Vec<(VertexId, VertexId)> =
                (0..3).map(|_| (ids[rng.gen_range(0..4)], ids[rng.gen_range(0..4)])).collect();
            let mut uf = UnionFind::new(4);
            let pos = |v| ids.iter().position(|&x| x == v).unwrap();
            let acyclic = edges.iter().all(|&(x, y)| uf.union(pos(x), pos(y)));
            assert_eq!(check_tree_at_root(&edges, 4), acyclic && uf.sets() == 1, "{edges:?}");
        }
    }

    #[test]
    fn inter_fragment_count_matches_direct_count() {
        for seed in 0..12u64 {
            let g = random_connected(30, 25, 900, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = CandidateMarking::from_mask((0..g.m()).map(|_| rng.gen_bool(0.5)).collect());
            let mut net = Network::new(&g, &t, EngineConfig::for_graph(&g)).unwrap();
            let bfs = build_bfs(&mut net, "bfs", 0).unwrap();
            let nbr = exchange_ids(&mut net, "ids").unwrap();
            let fv = dom_part(&mut net, "part", &nbr, 3).unwrap();
            let nbr_fid = exchange_fragment_ids(&mut net, "fid", &fv).unwrap();
            let got = count_inter_fragment_edges(&mut net, "count", &bfs, &fv, &nbr_fid).unwrap();
            let mfc = Mfc::from_views(&g, &fv);
            let direct = (0..g.m())
                .filter(|&e| {
                    let (u, v) = g.endpoints(e);
                    t.contains(e) && mfc.assignment[u] != mfc.assignment[v]
                })
                .count() as u64;
            assert_eq!(got, direct, "seed {seed}");
        }
    }

    #[test]
    fn random_instances_match_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut steps = BTreeSet::new();
        for seed in 0..30u64 {
            let n = 4 + (seed as u32 * 5) % 40;
            let wmax = if seed % 3 == 0 { 3 } else { u64::from(n * n) };
            let g = random_connected(n, (seed as usize * 7) % 60, wmax, seed);
            let mst = mst_oracle(&g, &CandidateMarking::empty(&g)).unwrap();
            let mut cases = alloc::vec![CandidateMarking::from_edges(&g, mst.iter().copied())];
            // swap a tree edge for a chord on its cycle
            let chord = (0..g.m()).find(|e| !mst.contains(e));
            if let Some(c) = chord {
                for &drop in &mst {
                    let swapped: Vec<usize> = mst.iter().copied().filter(|&e| e != drop).chain([c]).collect();
                    let t = CandidateMarking::from_edges(&g, swapped);
                    if crate::oracle::is_spanning_tree(&g, &t) {
                        cases.push(t);
                        break;
                    }
                }
                cases.push(CandidateMarking::from_edges(&g, mst.iter().copied().chain([c])));
            }
            cases.push(CandidateMarking::from_edges(&g, mst.iter().copied().skip(1)));
            cases.push(CandidateMarking::from_mask((0..g.m()).map(|_| rng.gen_bool(0.6)).collect()));
            for t in cases {
                let out = run(&g, &t);
                assert_eq!(out.verdict, is_mst(&g, &t).unwrap(), "seed {seed}");
                steps.insert(out.rejected_at);
                if n as u64 > out.stats.k && out.stats.fragments > 0 {
                    assert!(out.stats.fragments * out.stats.k <= u64::from(n));
                }
            }
        }
        for step in [None, Some("1.e"), Some("2.b"), Some("3.e")] {
            assert!(steps.contains(&step), "{step:?} never reached");
        }
    }

    #[test]
    fn simultaneous_wakeup_elects_min_id() {
        let g = random_connected(20, 15, 400, 2);
        let t = CandidateMarking::from_edges(&g, mst_oracle(&g, &CandidateMarking::empty(&g)).unwrap());
        let mut cfg = EngineConfig::for_graph(&g);
        cfg.wakeup = crate::sim::Wakeup::Simultaneous;
        let out = verify_mst_distributed(&g, &t, cfg).unwrap();
        assert!(out.verdict);
        assert!(out.metrics.phases.contains_key("elect"));
    }

    #[test]
    fn disconnected_is_rejected_early() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 1), (2, 3, 1)]).unwrap();
        let t = CandidateMarking::all(&g);
        assert_eq!(verify_mst_distributed(&g, &t, EngineConfig::for_graph(&g)).unwrap_err(), Error::NotConnected);
    }
}
