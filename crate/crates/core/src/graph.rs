//! Weighted graphs, candidate markings and the tie-broken edge order.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::bits::{width_for, BitReader, Bits};
use crate::error::{Error, Result};

/// Unique vertex identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// Index into [`WeightedGraph::edges`].
pub type EdgeId = usize;

/// An undirected edge, stored in the orientation it was inserted with.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
}

impl Edge {
    pub fn id_min(&self) -> VertexId {
        self.u.min(self.v)
    }

    pub fn id_max(&self) -> VertexId {
        self.u.max(self.v)
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// One incident link of a vertex. Ports are numbered in edge insertion order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Port {
    /// Vertex index (not id) of the neighbor.
    pub neighbor: usize,
    pub edge: EdgeId,
}

/// Field widths shared by every node: enough bits for any identifier and
/// any weight of the graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Widths {
    pub id: u32,
    pub weight: u32,
}

impl Widths {
    /// Width of an encoded [`TieBrokenWeight`].
    pub fn tie_broken(&self) -> u32 {
        self.weight + 1 + 2 * self.id
    }
}

/// Undirected graph with unique vertex ids, no self-loops, no parallel
/// edges and weights bounded by `weight_bound`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightedGraph {
    ids: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Port>>,
    lookup: BTreeMap<(VertexId, VertexId), EdgeId>,
    weight_bound: u64,
}

/// `|V|^2`, the default weight bound.
pub fn default_weight_bound(n: usize) -> u64 {
    let n = n.max(1) as u64;
    n.saturating_mul(n)
}

impl WeightedGraph {
    /// Builds a graph with the default weight bound `|V|^2`.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, u64)>,
    ) -> Result<Self> {
        let vertices: Vec<VertexId> = vertices.into_iter().collect();
        let bound = default_weight_bound(vertices.len());
        Self::with_weight_bound(vertices, edges, bound)
    }

    /// Graph on ids `0..n`.
    pub fn from_edges(n: u32, edges: impl IntoIterator<Item = (u32, u32, u64)>) -> Result<Self> {
        Self::new(
            (0..n).map(VertexId),
            edges.into_iter().map(|(u, v, w)| (VertexId(u), VertexId(v), w)),
        )
    }

    pub fn with_weight_bound(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId, u64)>,
        weight_bound: u64,
    ) -> Result<Self> {
        let mut ids: Vec<VertexId> = vertices.into_iter().collect();
        if ids.is_empty() {
            return Err(Error::Invalid("graph needs at least one vertex".into()));
        }
        ids.sort_unstable();
        for w in ids.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVertex(w[0]));
            }
        }
        let index: BTreeMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = WeightedGraph {
            adjacency: alloc::vec![Vec::new(); ids.len()],
            ids,
            index,
            edges: Vec::new(),
            ends: Vec::new(),
            lookup: BTreeMap::new(),
            weight_bound,
        };
        for (u, v, w) in edges {
            g.push_edge(u, v, w)?;
        }
        Ok(g)
    }

    fn push_edge(&mut self, u: VertexId, v: VertexId, weight: u64) -> Result<EdgeId> {
        let a = *self.index.get(&u).ok_or(Error::UnknownVertex(u))?;
        let b = *self.index.get(&v).ok_or(Error::UnknownVertex(v))?;
        if a == b {
            return Err(Error::SelfLoop(u));
        }
        if weight > self.weight_bound {
            return Err(Error::WeightOutOfBounds { weight, bound: self.weight_bound });
        }
        let key = (u.min(v), u.max(v));
        if self.lookup.contains_key(&key) {
            return Err(Error::ParallelEdge(key.0, key.1));
        }
        let e = self.edges.len();
        self.edges.push(Edge { u, v, weight });
        self.ends.push((a, b));
        self.adjacency[a].push(Port { neighbor: b, edge: e });
        self.adjacency[b].push(Port { neighbor: a, edge: e });
        self.lookup.insert(key, e);
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn weight_bound(&self) -> u64 {
        self.weight_bound
    }

    /// Vertex ids in ascending order; position is the vertex index.
    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    /// Vertex indices of the edge's endpoints, in stored orientation.
    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        self.ends[e]
    }

    pub fn ports(&self, index: usize) -> &[Port] {
        &self.adjacency[index]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.lookup.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn widths(&self) -> Widths {
        let max_id = self.ids.last().map_or(0, |v| u64::from(v.0));
        Widths {
            id: width_for(max_id.max(self.n() as u64)),
            weight: width_for(self.weight_bound),
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = alloc::vec![false; self.n()];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for p in &self.adjacency[x] {
                if !seen[p.neighbor] {
                    seen[p.neighbor] = true;
                    count += 1;
                    stack.push(p.neighbor);
                }
            }
        }
        count == self.n()
    }

    /// Hop distances from `source` (vertex index); `None` if unreachable.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = alloc::vec![None; self.n()];
        let mut queue = alloc::collections::VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for p in &self.adjacency[x] {
                if dist[p.neighbor].is_none() {
                    dist[p.neighbor] = Some(d + 1);
                    queue.push_back(p.neighbor);
                }
            }
        }
        dist
    }

    /// Diameter by BFS from every vertex; `None` if disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for s in 0..self.n() {
            for d in self.bfs_distances(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Replaces `e1 = (u, v)` and `e2 = (z, w)` by `(u, w)` and `(v, z)`,
    /// keeping every vertex's port numbering. `u` and `z` keep their port,
    /// `v` and `w` see the new neighbor on the port that held the old one.
    pub(crate) fn cross_wired(&self, e1: EdgeId, e2: EdgeId) -> Result<WeightedGraph> {
        let Edge { u, v, weight: w1 } = self.edges[e1];
        let Edge { u: z, v: w, weight: w2 } = self.edges[e2];
        let (iu, iv) = self.ends[e1];
        let (iz, iw) = self.ends[e2];
        if [iu, iv].contains(&iz) || [iu, iv].contains(&iw) {
            return Err(Error::Invalid("cross-wired edges must be vertex disjoint".into()));
        }
        if self.edge_between(u, w).is_some() || self.edge_between(v, z).is_some() {
            return Err(Error::ParallelEdge(u, w));
        }
        let mut g = self.clone();
        g.lookup.remove(&(u.min(v), u.max(v)));
        g.lookup.remove(&(z.min(w), z.max(w)));
        g.edges[e1] = Edge { u, v: w, weight: w1 };
        g.edges[e2] = Edge { u: v, v: z, weight: w2 };
        g.ends[e1] = (iu, iw);
        g.ends[e2] = (iv, iz);
        g.lookup.insert((u.min(w), u.max(w)), e1);
        g.lookup.insert((v.min(z), v.max(z)), e2);
        for p in &mut g.adjacency[iu] {
            if p.edge == e1 {
                p.neighbor = iw;
            }
        }
        for p in &mut g.adjacency[iv] {
            if p.edge == e1 {
                *p = Port { neighbor: iz, edge: e2 };
            }
        }
        for p in &mut g.adjacency[iz] {
            if p.edge == e2 {
                p.neighbor = iv;
            }
        }
        for p in &mut g.adjacency[iw] {
            if p.edge == e2 {
                *p = Port { neighbor: iu, edge: e1 };
            }
        }
        Ok(g)
    }
}

/// The candidate edge set `T`, one indicator per edge of the graph it was
/// built for.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CandidateMarking {
    marked: Vec<bool>,
}

impl CandidateMarking {
    pub fn empty(g: &WeightedGraph) -> Self {
        CandidateMarking { marked: alloc::vec![false; g.m()] }
    }

    pub fn all(g: &WeightedGraph) -> Self {
        CandidateMarking { marked: alloc::vec![true; g.m()] }
    }

    pub fn from_edges(g: &WeightedGraph, edges: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut t = Self::empty(g);
        for e in edges {
            t.marked[e] = true;
        }
        t
    }

    pub fn from_pairs(
        g: &WeightedGraph,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut t = Self::empty(g);
        for (u, v) in pairs {
            let e = g.edge_between(u, v).ok_or(Error::UnknownEdge(u, v))?;
            t.marked[e] = true;
        }
        Ok(t)
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        CandidateMarking { marked: mask }
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.marked[e]
    }

    pub fn set(&mut self, e: EdgeId, marked: bool) {
        self.marked[e] = marked;
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|&&b| b).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.marked.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e)
    }

    pub(crate) fn check(&self, g: &WeightedGraph) -> Result<()> {
        if self.marked.len() != g.m() {
            return Err(Error::MarkingMismatch { marking: self.marked.len(), edges: g.m() });
        }
        Ok(())
    }
}

/// `<weight, 1 - Y, id_min, id_max>`, compared lexicographically.
///
/// Marked edges sort before unmarked edges of equal weight, and the id pair
/// makes the order strict on the edges of one graph.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct TieBrokenWeight {
    pub weight: u64,
    pub unmarked: bool,
    pub id_min: VertexId,
    pub id_max: VertexId,
}

impl TieBrokenWeight {
    /// All-zero tuple; never the weight of a real edge since `id_min < id_max`.
    pub const SENTINEL: TieBrokenWeight =
        TieBrokenWeight { weight: 0, unmarked: false, id_min: VertexId(0), id_max: VertexId(0) };

    pub fn new(weight: u64, marked: bool, a: VertexId, b: VertexId) -> Self {
        TieBrokenWeight { weight, unmarked: !marked, id_min: a.min(b), id_max: a.max(b) }
    }

    pub fn of_edge(g: &WeightedGraph, t: &CandidateMarking, e: EdgeId) -> Self {
        let edge = g.edge(e);
        Self::new(edge.weight, t.contains(e), edge.u, edge.v)
    }

    pub fn anti_indicator(&self) -> u8 {
        u8::from(self.unmarked)
    }

    pub fn encode(&self, w: &Widths, out: &mut Bits) -> Result<()> {
        out.push_uint(self.weight, w.weight)?;
        out.push_bit(self.unmarked);
        out.push_uint(u64::from(self.id_min.0), w.id)?;
        out.push_uint(u64::from(self.id_max.0), w.id)
    }

    pub fn decode(w: &Widths, r: &mut BitReader<'_>) -> Result<Self> {
        Ok(TieBrokenWeight {
            weight: r.read_uint(w.weight)?,
            unmarked: r.read_bit()?,
            id_min: VertexId(r.read_uint(w.id)? as u32),
            id_max: VertexId(r.read_uint(w.id)? as u32),
        })
    }
}

impl fmt::Display for TieBrokenWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{},{}>", self.weight, self.anti_indicator(), self.id_min, self.id_max)
    }
}

/// The tie-broken weight of the edge between `u` and `v`.
pub fn tie_broken_weight(
    g: &WeightedGraph,
    t: &CandidateMarking,
    u: VertexId,
    v: VertexId,
) -> Result<TieBrokenWeight> {
    t.check(g)?;
    let e = g.edge_between(u, v).ok_or(Error::UnknownEdge(u, v))?;
    Ok(TieBrokenWeight::of_edge(g, t, e))
}
