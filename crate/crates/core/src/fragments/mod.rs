//! Partition into MST fragments (an MFC) of size at least `k + 1` and
//! diameter `O(k)`.
//!
//! Fragments grow in `⌈log₂(k+1)⌉` phases. In each phase every fragment of
//! size at most `k` picks its minimum outgoing edge under ω′. The chosen
//! edges form a forest of fragments; a Cole–Vishkin colouring and a
//! maximal independent set over it split the forest into stars that merge
//! around their MIS centres. A closing split cuts every tree into pieces
//! of size at least `k + 1` and diameter at most `3k - 1`.
//!
//! [`dom_part`] runs this on the engine; [`dom_part_reference`] computes
//! the same partition centrally.

mod distributed;
mod reference;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

pub use distributed::{dom_part, exchange_fragment_ids, internal_edges_ok, verify_internal_edges};
pub use reference::dom_part_reference;

use crate::bits::width_for;
use crate::graph::{CandidateMarking, EdgeId, VertexId, WeightedGraph};
use crate::oracle::mst_oracle;

/// What one vertex knows about its fragment.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FragmentView {
    pub fid: VertexId,
    /// Ports of incident fragment edges, ascending.
    pub ports: Vec<usize>,
}

impl FragmentView {
    pub fn is_leader(&self, own: VertexId) -> bool {
        self.fid == own
    }
}

/// An MST fragment collection. Fragment ids are leader ids.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mfc {
    /// Fragment id per vertex index.
    pub assignment: Vec<VertexId>,
    pub leader: BTreeMap<VertexId, VertexId>,
    pub fragment_edges: BTreeMap<VertexId, Vec<EdgeId>>,
}

/// Number of growth phases, `⌈log₂(k+1)⌉`.
pub fn growth_phases(k: u64) -> u32 {
    width_for(k.max(1))
}

/// Cole–Vishkin iterations needed to bring `2^id_width` colours down to six.
pub fn colour_iterations(id_width: u32) -> u32 {
    let mut range: u64 = 1 << id_width.min(63);
    let mut it = 0;
    while range > 6 {
        range = 2 * u64::from(width_for(range - 1));
        it += 1;
    }
    it
}

impl Mfc {
    pub fn from_views(g: &WeightedGraph, views: &[FragmentView]) -> Mfc {
        let assignment: Vec<VertexId> = views.iter().map(|v| v.fid).collect();
        let mut leader = BTreeMap::new();
        let mut fragment_edges: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
        for (i, v) in views.iter().enumerate() {
            leader.insert(v.fid, v.fid);
            let edges = fragment_edges.entry(v.fid).or_default();
            for &p in &v.ports {
                let port = g.ports(i)[p];
                if i < port.neighbor {
                    edges.push(port.edge);
                }
            }
        }
        for edges in fragment_edges.values_mut() {
            edges.sort_unstable();
        }
        Mfc { assignment, leader, fragment_edges }
    }

    /// Number of fragments `f`.
    pub fn count(&self) -> usize {
        self.leader.len()
    }

    pub fn fragment_of(&self, g: &WeightedGraph, v: VertexId) -> Option<VertexId> {
        g.index_of(v).map(|i| self.assignment[i])
    }

    pub fn members(&self, fid: VertexId) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fid).collect()
    }

    /// Checks every MFC property for parameter `k`, describing the first
    /// violation.
    pub fn check(&self, g: &WeightedGraph, t: &CandidateMarking, k: u64) -> core::result::Result<(), String> {
        let n = g.n();
        if self.assignment.len() != n {
            return Err(String::from("assignment does not cover V"));
        }
        let mst: alloc::collections::BTreeSet<EdgeId> =
            mst_oracle(g, t).map_err(|e| alloc::format!("{e}"))?.into_iter().collect();
        let mut seen = alloc::vec![false; n];
        for (&fid, &lead) in &self.leader {
            let members = self.members(fid);
            if fid != lead {
                return Err(alloc::format!("fragment {fid} has leader {lead}"));
            }
            let li = g.index_of(lead).ok_or_else(|| alloc::format!("leader {lead} is not a vertex"))?;
            if self.assignment[li] != fid {
                return Err(alloc::format!("leader {lead} is outside its fragment"));
            }
            let edges = self.fragment_edges.get(&fid).map(Vec::as_slice).unwrap_or(&[]);
            if edges.len() + 1 != members.len() {
                return Err(alloc::format!("fragment {fid}: {} edges on {} vertices", edges.len(), members.len()));
            }
            let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &e in edges {
                if !mst.contains(&e) {
                    return Err(alloc::format!("fragment {fid}: edge {e} is not in the MST"));
                }
                let (a, b) = g.endpoints(e);
                if self.assignment[a] != fid || self.assignment[b] != fid {
                    return Err(alloc::format!("fragment {fid}: edge {e} leaves the fragment"));
                }
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            let (far, _, reached) = tree_bfs(&adj, members[0]);
            if reached != members.len() {
                return Err(alloc::format!("fragment {fid} is not connected"));
            }
            let (_, diam, _) = tree_bfs(&adj, far);
            if members.len() < (k as usize + 1).min(n) {
                return Err(alloc::format!("fragment {fid} has {} < min(k+1, n) vertices", members.len()));
            }
            if diam as u64 > 4 * k {
                return Err(alloc::format!("fragment {fid} has diameter {diam} > 4k"));
            }
            for i in members {
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(String::from("some vertex is in no fragment"));
        }
        if n as u64 > k && self.count() as u64 * k > n as u64 {
            return Err(alloc::format!("f = {} > n/k", self.count()));
        }
        Ok(())
    }

    /// `vertex fragment_id` lines, then a blank line, then `fragment_id leader`.
    pub fn export(&self, g: &WeightedGraph) -> String {
        let mut out = String::new();
        for (i, fid) in self.assignment.iter().enumerate() {
            let _ = writeln!(out, "{} {}", g.id(i), fid);
        }
        out.push('\n');
        for (fid, lead) in &self.leader {
            let _ = writeln!(out, "{fid} {lead}");
        }
        out
    }
}

/// Farthest vertex, its distance and the number of vertices reached.
fn tree_bfs(adj: &BTreeMap<usize, Vec<usize>>, start: usize) -> (usize, usize, usize) {
    let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
    dist.insert(start, 0);
    let mut q = VecDeque::from([start]);
    let mut far = (start, 0);
    while let Some(x) = q.pop_front() {
        let d = dist[&x];
        if d > far.1 {
            far = (x, d);
        }
        for &y in adj.get(&x).map(Vec::as_slice).unwrap_or(&[]) {
            if !dist.contains_key(&y) {
                dist.insert(y, d + 1);
                q.push_back(y);
            }
        }
    }
    (far.0, far.1, dist.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::exchange_ids;
    use crate::sim::{EngineConfig, Network};
    use crate::testutil::random_connected;

    fn distributed(g: &WeightedGraph, t: &CandidateMarking, k: u64) -> Mfc {
        let mut net = Network::new(g, t, EngineConfig::for_graph(g)).unwrap();
        let nbr = exchange_ids(&mut net, "ids").unwrap();
        let fv = dom_part(&mut net, "part", &nbr, k).unwrap();
        assert!(net.metrics().max_payload_bits <= net.budget() as usize);
        Mfc::from_views(g, &fv)
    }

    #[test]
    fn phase_and_colour_counts() {
        assert_eq!(growth_phases(1), 1);
        assert_eq!(growth_phases(2), 2);
        assert_eq!(growth_phases(3), 2);
        assert_eq!(growth_phases(4), 3);
        assert_eq!(colour_iterations(13), 4);
        assert_eq!(colour_iterations(2), 0);
    }

    #[test]
    fn small_graph_is_one_fragment() {
        let g = random_connected(6, 4, 36, 3);
        let t = CandidateMarking::empty(&g);
        for k in [5, 6, 9] {
            let m = distributed(&g, &t, k);
            assert_eq!(m.count(), 1);
            assert_eq!(m.fragment_edges.values().next().unwrap(), &mst_oracle(&g, &t).unwrap());
            assert_eq!(m, dom_part_reference(&g, &t, k).unwrap());
        }
    }

    #[test]
    fn ascending_path() {
        let g = WeightedGraph::from_edges(10, (1..10).map(|i| (i - 1, i, u64::from(i)))).unwrap();
        let t = CandidateMarking::empty(&g);
        let m = distributed(&g, &t, 2);
        m.check(&g, &t, 2).unwrap();
        assert!(m.leader.keys().all(|&f| m.members(f).len() >= 3));
        assert_eq!(m, dom_part_reference(&g, &t, 2).unwrap());
    }

    #[test]
    fn random_graphs_match_reference() {
        for seed in 0..40u64 {
            let n = 5 + (seed as u32 * 7) % 60;
            let g = random_connected(n, (seed as usize * 13) % 90, u64::from(n * n), seed);
            let t = CandidateMarking::empty(&g);
            for k in [1, 2, 3, 5, 8] {
                let r = dom_part_reference(&g, &t, k).unwrap();
                r.check(&g, &t, k).unwrap_or_else(|e| panic!("seed {seed} k {k}: {e}"));
                let d = distributed(&g, &t, k);
                assert_eq!(d, r, "seed {seed} k {k}");
            }
        }
    }

    #[test]
    fn internal_edge_check() {
        let g = random_connected(30, 30, 900, 11);
        let t0 = CandidateMarking::empty(&g);
        let tree = mst_oracle(&g, &t0).unwrap();
        let t = CandidateMarking::from_edges(&g, tree.iter().copied());
        let mut net = Network::new(&g, &t, EngineConfig::for_graph(&g)).unwrap();
        let nbr = exchange_ids(&mut net, "ids").unwrap();
        let fv = dom_part(&mut net, "part", &nbr, 3).unwrap();
        assert!(verify_internal_edges(&mut net, "1.c", &fv).unwrap().iter().all(|&b| b));
        let nbr_fid = exchange_fragment_ids(&mut net, "1.c", &fv).unwrap();

        // drop one fragment edge from the marking
        let mfc = Mfc::from_views(&g, &fv);
        let (_, edges) = mfc.fragment_edges.iter().find(|(_, e)| !e.is_empty()).unwrap();
        let e = edges[0];
        let mut missing = t.clone();
        missing.set(e, false);
        let net2 = Network::new(&g, &missing, EngineConfig::for_graph(&g)).unwrap();
        let ok = internal_edges_ok(net2.views(), &fv, &nbr_fid);
        let (a, b) = g.endpoints(e);
        assert!(!ok[a] && !ok[b]);
        assert_eq!(ok.iter().filter(|&&x| !x).count(), 2);

        // mark a non-fragment edge inside one fragment
        let extra = (0..g.m()).find(|&e| {
            let (a, b) = g.endpoints(e);
            mfc.assignment[a] == mfc.assignment[b] && !t.contains(e)
        });
        if let Some(x) = extra {
            let mut more = t.clone();
            more.set(x, true);
            let net3 = Network::new(&g, &more, EngineConfig::for_graph(&g)).unwrap();
            let ok = internal_edges_ok(net3.views(), &fv, &nbr_fid);
            let (a, b) = g.endpoints(x);
            assert!(!ok[a] && !ok[b]);
        }
    }
}
