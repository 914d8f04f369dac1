//! Distributed building blocks run as stages of a [`Network`]: BFS with
//! echo, synchronized release, convergecast, broadcast, pipelined upcast
//! and downcast, neighbor exchange and leader election.
//!
//! Each function is a driver that runs one or more stages. Per-node state
//! lives in vectors indexed by vertex and node `i` only ever touches entry
//! `i` and the messages it receives.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::sim::Network;

/// Rooted forest over the graph, stored per node as ports.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Forest {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl Forest {
    pub fn is_root(&self, i: usize) -> bool {
        self.parent[i].is_none()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BfsTree {
    pub forest: Forest,
    /// Vertex index of the root.
    pub root: usize,
    pub depth: Vec<u32>,
    /// Vertex count, learned by the root through the echo.
    pub n: u64,
    /// Height `d` of the tree, learned by the root.
    pub height: u32,
}

const EXPLORE: u64 = 0;
const ACK: u64 = 1;
const ECHO: u64 = 2;

#[derive(Clone, Default)]
struct BfsNode {
    depth: Option<u32>,
    parent: Option<usize>,
    awaiting: usize,
    children: Vec<usize>,
    echoes: usize,
    size: u64,
    height: u32,
    done: bool,
}

/// Builds a BFS tree from `source` by flooding explore messages. The parent
/// of a node is the smallest-id sender among the first explores it gets.
/// Children are learned from acknowledgements and an echo carries subtree
/// size and height back to the root.
pub fn build_bfs(net: &mut Network<'_>, phase: &str, source: usize) -> Result<BfsTree> {
    let n = net.n();
    let w = net.widths();
    let mut st: Vec<BfsNode> = alloc::vec![BfsNode::default(); n];
    let awake: Vec<bool> = (0..n).map(|i| i == source).collect();
    net.run_link_stage(phase, &awake, |i, ctx| {
        let s = &mut st[i];
        let mut explores: Vec<(usize, u64, u32)> = Vec::new();
        for (p, m) in ctx.inbox().iter().enumerate() {
            let Some(m) = m else { continue };
            let mut r = m.reader();
            match r.read_uint(2)? {
                EXPLORE => {
                    let id = r.read_uint(w.id)?;
                    let depth = r.read_uint(w.id)? as u32;
                    explores.push((p, id, depth));
                }
                ACK => {
                    s.awaiting -= 1;
                    if r.read_bit()? {
                        s.children.push(p);
                    }
                }
                _ => {
                    s.echoes += 1;
                    s.size += r.read_uint(w.id)?;
                    s.height = s.height.max(r.read_uint(w.id)? as u32 + 1);
                }
            }
        }
        let mut explore_to: Vec<usize> = Vec::new();
        if s.depth.is_none() && (ctx.round() == 0 && i == source) {
            s.depth = Some(0);
            explore_to = (0..ctx.degree()).collect();
        } else if s.depth.is_none() && !explores.is_empty() {
            let &(parent, _, pd) = explores.iter().min_by_key(|(_, id, _)| *id).unwrap_or(&explores[0]);
            s.depth = Some(pd + 1);
            s.parent = Some(parent);
            explore_to = (0..ctx.degree()).filter(|p| !explores.iter().any(|e| e.0 == *p)).collect();
        }
        for &(p, _, _) in &explores {
            let mut b = Bits::new();
            b.push_uint(ACK, 2)?;
            b.push_bit(Some(p) == s.parent);
            ctx.send(p, &b)?;
        }
        if !explore_to.is_empty() {
            let mut b = Bits::new();
            b.push_uint(EXPLORE, 2)?;
            b.push_uint(u64::from(ctx.id().0), w.id)?;
            b.push_uint(u64::from(s.depth.unwrap_or(0)), w.id)?;
            s.awaiting = explore_to.len();
            for p in explore_to {
                ctx.send(p, &b)?;
            }
        }
        if s.depth.is_some() && !s.done && s.awaiting == 0 && s.echoes == s.children.len() {
            s.done = true;
            s.size += 1;
            if let Some(p) = s.parent {
                let mut b = Bits::new();
                b.push_uint(ECHO, 2)?;
                b.push_uint(s.size, w.id)?;
                b.push_uint(u64::from(s.height), w.id)?;
                ctx.send(p, &b)?;
            }
        }
        ctx.halt();
        Ok(())
    })?;
    if st.iter().any(|s| s.depth.is_none()) {
        return Err(Error::NotConnected);
    }
    let root = &st[source];
    Ok(BfsTree {
        n: root.size,
        height: root.height,
        root: source,
        depth: st.iter().map(|s| s.depth.unwrap_or(0)).collect(),
        forest: Forest {
            parent: st.iter().map(|s| s.parent).collect(),
            children: st.into_iter().map(|mut s| {
                s.children.sort_unstable();
                s.children
            }).collect(),
        },
    })
}

/// Per-node result of [`synchronized_release`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Release {
    pub values: Vec<Bits>,
    /// Counter each node received; the root starts with `d + 1`.
    pub counter: Vec<u64>,
    /// Stage round in which each node begins the next step.
    pub begin: Vec<u64>,
}

/// Sends `value` down the tree with a counter that drops by one per level.
/// A node that has the `L`-chunk message in round `p` with counter `c` waits
/// until round `p + (c - 1) L + 2`, which is the same round for everyone.
pub fn synchronized_release(net: &mut Network<'_>, phase: &str, bfs: &BfsTree, value: &Bits) -> Result<Release> {
    let n = net.n();
    let w = net.widths();
    let mut values: Vec<Option<Bits>> = alloc::vec![None; n];
    let mut counter = alloc::vec![0u64; n];
    let mut begin: Vec<Option<u64>> = alloc::vec![None; n];
    let awake: Vec<bool> = (0..n).map(|i| i == bfs.root).collect();
    let children = &bfs.forest.children;
    let parent = &bfs.forest.parent;
    net.run_link_stage(phase, &awake, |i, ctx| {
        let incoming = if i == bfs.root && ctx.round() == 0 {
            Some((value.clone(), u64::from(bfs.height) + 1))
        } else {
            match parent[i].and_then(|p| ctx.inbox()[p].as_ref()) {
                Some(m) => {
                    let mut r = m.reader();
                    let c = r.read_uint(w.id)?;
                    let rest = r.remaining();
                    Some((r.read_bits(rest)?, c))
                }
                None => None,
            }
        };
        if let Some((v, c)) = incoming {
            let mut msg = Bits::new();
            msg.push_uint(c.saturating_sub(1), w.id)?;
            msg.push_bits(&v);
            let chunks = ctx.chunks_for(msg.len()) as u64;
            for &p in &children[i] {
                ctx.send(p, &msg)?;
            }
            // a lone root has nobody to wait for
            let slack = if children[i].is_empty() && parent[i].is_none() { 0 } else { 2 };
            begin[i] = Some(ctx.round() + c.saturating_sub(1) * chunks + slack);
            values[i] = Some(v);
            counter[i] = c;
        }
        if begin[i].is_some_and(|b| ctx.round() >= b) {
            ctx.halt();
        }
        Ok(())
    })?;
    Ok(Release {
        values: values.into_iter().map(|v| v.ok_or(Error::NotConnected)).collect::<Result<_>>()?,
        counter,
        begin: begin.into_iter().map(|b| b.unwrap_or(0)).collect(),
    })
}

/// Convergecast with an arbitrary per-node fold. Once node `i` has heard
/// from every child it computes `compute(i, child values by port)` and sends
/// the result to its parent. Returns each node's computed value.
pub fn upward(
    net: &mut Network<'_>,
    phase: &str,
    forest: &Forest,
    mut compute: impl FnMut(usize, &[(usize, Bits)]) -> Result<Bits>,
) -> Result<Vec<Bits>> {
    let n = net.n();
    let mut got: Vec<Vec<(usize, Bits)>> = alloc::vec![Vec::new(); n];
    let mut result: Vec<Option<Bits>> = alloc::vec![None; n];
    let awake: Vec<bool> = (0..n).map(|i| forest.children[i].is_empty()).collect();
    net.run_link_stage(phase, &awake, |i, ctx| {
        for (p, m) in ctx.inbox().iter().enumerate() {
            if let Some(m) = m {
                got[i].push((p, m.clone()));
            }
        }
        if result[i].is_none() && got[i].len() == forest.children[i].len() {
            got[i].sort_by_key(|(p, _)| *p);
            let v = compute(i, &got[i])?;
            if let Some(p) = forest.parent[i] {
                ctx.send(p, &v)?;
            }
            result[i] = Some(v);
        }
        ctx.halt();
        Ok(())
    })?;
    result.into_iter().map(|r| r.ok_or(Error::Invalid("convergecast did not complete".into()))).collect()
}

/// Top-down flow. Roots with a `start` value act in round 0; every other
/// node acts when its parent's message arrives. `f(i, value)` returns the
/// messages node `i` sends to its children.
pub fn downward(
    net: &mut Network<'_>,
    phase: &str,
    forest: &Forest,
    start: &[Option<Bits>],
    mut f: impl FnMut(usize, &Bits) -> Result<Vec<(usize, Bits)>>,
) -> Result<()> {
    let awake: Vec<bool> = start.iter().map(Option::is_some).collect();
    net.run_link_stage(phase, &awake, |i, ctx| {
        let incoming = if ctx.round() == 0 && start[i].is_some() {
            start[i].clone()
        } else {
            forest.parent[i].and_then(|p| ctx.inbox()[p].clone())
        };
        if let Some(v) = incoming {
            for (p, m) in f(i, &v)? {
                ctx.send(p, &m)?;
            }
        }
        ctx.halt();
        Ok(())
    })?;
    Ok(())
}

/// Broadcast from every root that has a value; returns what each node got.
pub fn broadcast(net: &mut Network<'_>, phase: &str, forest: &Forest, start: &[Option<Bits>]) -> Result<Vec<Option<Bits>>> {
    let mut got: Vec<Option<Bits>> = alloc::vec![None; forest.len()];
    downward(net, phase, forest, start, |i, v| {
        got[i] = Some(v.clone());
        Ok(forest.children[i].iter().map(|&p| (p, v.clone())).collect())
    })?;
    Ok(got)
}

/// Sum of `local` over each subtree, in `width`-bit fields. Returns the
/// subtree sum at every node; a root holds the total of its tree.
pub fn convergecast_sum(
    net: &mut Network<'_>,
    phase: &str,
    forest: &Forest,
    local: &[u64],
    width: u32,
) -> Result<Vec<u64>> {
    let sums = upward(net, phase, forest, |i, kids| {
        let mut total = local[i];
        for (_, m) in kids {
            total = total.checked_add(m.reader().read_uint(width)?).ok_or(Error::ValueOverflow { value: u64::MAX, width })?;
        }
        let mut b = Bits::new();
        b.push_uint(total, width)?;
        Ok(b)
    })?;
    sums.iter().map(|b| b.reader().read_uint(width)).collect()
}

/// One round of neighbor exchange: node `i` sends `out(i)` and the result
/// holds, per node and port, what arrived.
pub fn exchange(
    net: &mut Network<'_>,
    phase: &str,
    mut out: impl FnMut(usize) -> Result<Vec<(usize, Bits)>>,
) -> Result<Vec<Vec<Option<Bits>>>> {
    let n = net.n();
    let mut got: Vec<Vec<Option<Bits>>> = net.views().iter().map(|v| alloc::vec![None; v.ports.len()]).collect();
    let mut sent = alloc::vec![false; n];
    let awake = alloc::vec![true; n];
    net.run_link_stage(phase, &awake, |i, ctx| {
        if !sent[i] {
            sent[i] = true;
            for (p, m) in out(i)? {
                ctx.send(p, &m)?;
            }
        }
        for (p, m) in ctx.inbox().iter().enumerate() {
            if m.is_some() {
                got[i][p] = m.clone();
            }
        }
        ctx.halt();
        Ok(())
    })?;
    Ok(got)
}

/// Every node learns the id behind each of its ports.
pub fn exchange_ids(net: &mut Network<'_>, phase: &str) -> Result<Vec<Vec<VertexId>>> {
    let w = net.widths();
    let ids: Vec<VertexId> = net.views().iter().map(|v| v.id).collect();
    let degrees: Vec<usize> = net.views().iter().map(|v| v.ports.len()).collect();
    let got = exchange(net, phase, |i| {
        let mut b = Bits::new();
        b.push_uint(u64::from(ids[i].0), w.id)?;
        Ok((0..degrees[i]).map(|p| (p, b.clone())).collect())
    })?;
    got.iter()
        .map(|ports| {
            ports
                .iter()
                .map(|m| {
                    let m = m.as_ref().ok_or(Error::Decode("missing neighbor id"))?;
                    Ok(VertexId(m.reader().read_uint(w.id)? as u32))
                })
                .collect()
        })
        .collect()
}

/// Result of [`upcast`].
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Upcast {
    /// Items collected at each root, in arrival order.
    pub at_root: Vec<Vec<Bits>>,
    /// Per node: routing key of an item to the child port it came from.
    pub routes: Vec<BTreeMap<u64, usize>>,
}

/// Pipelined upcast of all `items` to the roots. Every node forwards its
/// smallest buffered item whenever the parent link is free, then a done
/// marker once its children are done and its buffer is empty. With
/// `route_width`, the leading bits of each item are a key and every node
/// remembers which child port each key came through.
pub fn upcast(
    net: &mut Network<'_>,
    phase: &str,
    forest: &Forest,
    items: Vec<Vec<Bits>>,
    route_width: Option<u32>,
) -> Result<Upcast> {
    let n = net.n();
    let mut heap: Vec<BinaryHeap<Reverse<Bits>>> =
        items.into_iter().map(|v| v.into_iter().map(Reverse).collect()).collect();
    heap.resize_with(n, BinaryHeap::new);
    let mut done_children = alloc::vec![0usize; n];
    let mut sent_done = alloc::vec![false; n];
    let mut out = Upcast { at_root: alloc::vec![Vec::new(); n], routes: alloc::vec![BTreeMap::new(); n] };
    let awake = alloc::vec![true; n];
    net.run_link_stage(phase, &awake, |i, ctx| {
        for (p, m) in ctx.inbox().iter().enumerate() {
            let Some(m) = m else { continue };
            if m.get(0) {
                done_children[i] += 1;
                continue;
            }
            let item = m.slice(1, m.len());
            if let Some(kw) = route_width {
                out.routes[i].insert(item.reader().read_uint(kw)?, p);
            }
            if forest.is_root(i) {
                out.at_root[i].push(item);
            } else {
                heap[i].push(Reverse(item));
            }
        }
        let children_done = done_children[i] == forest.children[i].len();
        match forest.parent[i] {
            None => {
                out.at_root[i].extend(core::mem::take(&mut heap[i]).into_sorted_vec().into_iter().rev().map(|r| r.0));
                ctx.halt();
            }
            Some(p) => {
                if ctx.pending(p) == 0 {
                    if let Some(Reverse(item)) = heap[i].pop() {
                        let mut b = Bits::new();
                        b.push_bit(false);
                        b.push_bits(&item);
                        ctx.send(p, &b)?;
                    } else if children_done && !sent_done[i] {
                        sent_done[i] = true;
                        ctx.send(p, &Bits::from_bools([true]))?;
                    }
                }
                if heap[i].is_empty() && (sent_done[i] || !children_done) {
                    ctx.halt();
                }
            }
        }
        Ok(())
    })?;
    Ok(out)
}

/// Delivers each `(key, item)` from `root` to the node whose `own_key` is
/// `key`, following the routes an earlier [`upcast`] recorded. Items leave
/// the root in the given order and are pipelined along every edge.
pub fn downcast(
    net: &mut Network<'_>,
    phase: &str,
    forest: &Forest,
    routes: &[BTreeMap<u64, usize>],
    own_key: &[Option<u64>],
    root: usize,
    key_width: u32,
    items: Vec<(u64, Bits)>,
) -> Result<Vec<Vec<Bits>>> {
    let n = net.n();
    let mut delivered: Vec<Vec<Bits>> = alloc::vec![Vec::new(); n];
    let awake: Vec<bool> = (0..n).map(|i| i == root).collect();
    let mut start = Some(items);
    let route = |i: usize, key: u64| -> Result<usize> {
        routes[i].get(&key).copied().ok_or_else(|| Error::Invalid(alloc::format!("unknown downcast target {key}")))
    };
    net.run_link_stage(phase, &awake, |i, ctx| {
        let mut incoming: Vec<(u64, Bits)> = Vec::new();
        if i == root {
            incoming.extend(start.take().unwrap_or_default());
        }
        if let Some(m) = forest.parent[i].and_then(|p| ctx.inbox()[p].as_ref()) {
            let mut r = m.reader();
            let key = r.read_uint(key_width)?;
            let rest = r.remaining();
            incoming.push((key, r.read_bits(rest)?));
        }
        for (key, item) in incoming {
            if own_key[i] == Some(key) {
                delivered[i].push(item);
            } else {
                let p = route(i, key)?;
                let mut b = Bits::new();
                b.push_uint(key, key_width)?;
                b.push_bits(&item);
                ctx.send(p, &b)?;
            }
        }
        ctx.halt();
        Ok(())
    })?;
    Ok(delivered)
}

/// Minimum-id flooding; every node ends up knowing the smallest id.
pub fn elect_leader(net: &mut Network<'_>, phase: &str) -> Result<Vec<VertexId>> {
    let n = net.n();
    let w = net.widths();
    let mut best: Vec<VertexId> = net.views().iter().map(|v| v.id).collect();
    let awake = alloc::vec![true; n];
    net.run_link_stage(phase, &awake, |i, ctx| {
        let mut improved = ctx.round() == 0;
        for m in ctx.inbox().iter().flatten() {
            let id = VertexId(m.reader().read_uint(w.id)? as u32);
            if id < best[i] {
                best[i] = id;
                improved = true;
            }
        }
        if improved {
            let mut b = Bits::new();
            b.push_uint(u64::from(best[i].0), w.id)?;
            for p in 0..ctx.degree() {
                ctx.send(p, &b)?;
            }
        }
        ctx.halt();
        Ok(())
    })?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CandidateMarking, WeightedGraph};
    use crate::sim::{EngineConfig, Wakeup};

    fn star(leaves: u32) -> WeightedGraph {
        WeightedGraph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i, 1))).unwrap()
    }

    fn path(n: u32) -> WeightedGraph {
        WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1))).unwrap()
    }

    fn net(g: &WeightedGraph) -> Network<'_> {
        let t = CandidateMarking::empty(g);
        Network::new(g, &t, EngineConfig::for_graph(g)).unwrap()
    }

    #[test]
    fn bfs_on_star_and_path() {
        let g = star(5);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        assert_eq!((b.n, b.height), (6, 1));
        assert_eq!(b.forest.children[0].len(), 5);
        let g = path(10);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        assert_eq!((b.n, b.height), (10, 9));
        assert_eq!(b.depth[9], 9);
    }

    #[test]
    fn bfs_single_node() {
        let g = WeightedGraph::from_edges(1, []).unwrap();
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        assert_eq!((b.n, b.height), (1, 0));
        let r = synchronized_release(&mut nw, "rel", &b, &Bits::from_bools([true])).unwrap();
        assert_eq!(nw.metrics().rounds, 0);
        assert_eq!(r.counter, [1]);
    }

    #[test]
    fn release_aligns_start() {
        let g = path(4);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        let r = synchronized_release(&mut nw, "rel", &b, &Bits::from_bools([true, false])).unwrap();
        assert_eq!(r.counter[0], 4);
        assert!(r.begin.iter().all(|&x| x == 5), "{:?}", r.begin);
        assert_eq!(nw.metrics().phases["rel"].rounds, 5);

        let g = star(4);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        let r = synchronized_release(&mut nw, "rel", &b, &Bits::new()).unwrap();
        assert_eq!(r.counter, [2, 1, 1, 1, 1]);
        assert!(r.begin.iter().all(|&x| x == 3));
    }

    #[test]
    fn sums_and_broadcast() {
        let g = path(7);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 3).unwrap();
        let before = nw.metrics().messages;
        let s = convergecast_sum(&mut nw, "sum", &b.forest, &[1; 7], 8).unwrap();
        assert_eq!(s[3], 7);
        assert_eq!(nw.metrics().messages - before, 6);
        let mut start = alloc::vec![None; 7];
        start[3] = Some(Bits::from_bools([true, true]));
        let got = broadcast(&mut nw, "bc", &b.forest, &start).unwrap();
        assert!(got.iter().all(|x| x.as_ref().map(Bits::len) == Some(2)));
        let err = convergecast_sum(&mut nw, "sum", &b.forest, &[200; 7], 8).err().unwrap();
        assert!(matches!(err, Error::ValueOverflow { .. }));
    }

    #[test]
    fn upcast_on_a_line() {
        // k items at the far leaf of a path: d + k - 1 rounds, plus the done marker.
        let g = path(6);
        let mut nw = net(&g);
        let b = build_bfs(&mut nw, "bfs", 0).unwrap();
        let start = nw.clock();
        let k = 4;
        let mut items = alloc::vec![Vec::new(); 6];
        items[5] = (0..k).map(|x| { let mut b = Bits::new(); b.push_uint(x, 4).unwrap(); b }).collect();
        let up = upcast(&mut nw, "up", &b.forest, items, Some(4)).unwrap();
        assert_eq!(up.at_root[0].len(), k as usize);
        assert_eq!(nw.clock() - start, 5 + k);
        let own: Vec<Option<u64>> = (0..6).map(|i| if i == 5 { Some(2) } else { None }).collect();
        let d = downcast(&mut nw, "down", &b.forest, &up.routes, &own, 0, 4, alloc::vec![(2, Bits::from_bools([true]))]).unwrap();
        assert_eq!(d[5], [Bits::from_bools([true])]);
        assert!(downcast(&mut nw, "down", &b.forest, &up.routes, &own, 0, 4, alloc::vec![(9, Bits::new())]).is_err());
    }

    #[test]
    fn leader_is_min_id() {
        let ids = [5u32, 3, 8, 1, 7, 2, 6, 4];
        let g = WeightedGraph::new(
            ids.iter().map(|&x| VertexId(x)),
            (0..8).map(|i| (VertexId(ids[i]), VertexId(ids[(i + 1) % 8]), 1)),
        )
        .unwrap();
        let t = CandidateMarking::empty(&g);
        let cfg = EngineConfig { wakeup: Wakeup::Simultaneous, ..EngineConfig::for_graph(&g) };
        let mut nw = Network::new(&g, &t, cfg).unwrap();
        let l = elect_leader(&mut nw, "elect").unwrap();
        assert!(l.iter().all(|&x| x == VertexId(1)));
        assert!(nw.clock() <= 5);
    }
}
