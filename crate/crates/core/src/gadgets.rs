//! Lower-bound constructions: the graphs `F²_m` and their middle sets, the
//! weighted family `J²_m`, the reduction from vector equality to MST
//! verification, and the two-copy cross-wiring experiment.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{CandidateMarking, EdgeId, VertexId, WeightedGraph};
use crate::sim::{traces_similar, EngineConfig, Network, RoundTrace, Wakeup};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Role {
    /// `h_{im}`, stored with `i` in `0..=m`.
    Highway(u32),
    /// `v_l^j` with path `j` in `1..=m²` and position `l` in `0..=m²`.
    Path { j: u32, l: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Highway,
    Path,
    /// Spoke of star `star` into path `j`.
    Spoke { star: u32, j: u32 },
}

#[derive(Clone, Debug)]
pub struct F2mLayout {
    pub m: u32,
    pub graph: WeightedGraph,
    /// Role of each vertex, by index.
    pub roles: Vec<Role>,
    /// Kind of each edge, by edge id.
    pub kinds: Vec<EdgeKind>,
    pub s: VertexId,
    pub r: VertexId,
}

fn highway_id(i: u32) -> VertexId {
    VertexId(i)
}

fn path_id(m: u32, j: u32, l: u32) -> VertexId {
    VertexId((m + 1) + (j - 1) * (m * m + 1) + l)
}

fn layout(m: u32, spoke_weight: impl Fn(u32, u32) -> u64) -> Result<F2mLayout> {
    if m < 2 {
        return Err(Error::Invalid(alloc::format!("m must be at least 2, got {m}")));
    }
    let mm = m * m;
    let n = (m + 1) + mm * (mm + 1);
    let mut roles: Vec<Role> = (0..=m).map(Role::Highway).collect();
    for j in 1..=mm {
        roles.extend((0..=mm).map(|l| Role::Path { j, l }));
    }
    let mut edges = Vec::new();
    let mut kinds = Vec::new();
    for i in 0..m {
        edges.push((highway_id(i), highway_id(i + 1), 0));
        kinds.push(EdgeKind::Highway);
    }
    for j in 1..=mm {
        for l in 0..mm {
            edges.push((path_id(m, j, l), path_id(m, j, l + 1), 0));
            kinds.push(EdgeKind::Path);
        }
    }
    for star in 0..=m {
        for j in 1..=mm {
            edges.push((highway_id(star), path_id(m, j, star * m), spoke_weight(star, j)));
            kinds.push(EdgeKind::Spoke { star, j });
        }
    }
    let graph = WeightedGraph::new((0..n).map(VertexId), edges)?;
    Ok(F2mLayout { m, graph, roles, kinds, s: highway_id(0), r: highway_id(m) })
}

/// The unweighted graph `F²_m`; ids are `0..n`, highway first.
pub fn build_f2m(m: u32) -> Result<F2mLayout> {
    layout(m, |_, _| 0)
}

/// Least `δ` with `δm ≥ i`.
pub fn beta(m: u32, i: u32) -> u32 {
    i.div_ceil(m)
}

/// Largest `κ` with `κm ≤ m² − i`.
pub fn gamma(m: u32, i: u32) -> u32 {
    (m * m - i) / m
}

/// The `i`-middle set, sorted. `M_0` is everything but `s` and `r`.
pub fn middle_set(m: u32, i: u32) -> Result<Vec<VertexId>> {
    let mm = m * m;
    if m < 2 || i > mm / 2 {
        return Err(Error::Invalid(alloc::format!("middle set index {i} out of range for m = {m}")));
    }
    let f = build_f2m(m)?;
    let keep = |role: &Role| match *role {
        Role::Highway(h) if i == 0 => h != 0 && h != m,
        Role::Highway(h) => beta(m, i) <= h && h <= gamma(m, i),
        Role::Path { l, .. } => i <= l && l <= mm - i,
    };
    Ok(f.roles.iter().enumerate().filter(|(_, r)| keep(r)).map(|(v, _)| f.graph.id(v)).collect())
}

/// `J²_{m,γ}`: weight 0 on highway and paths, 4 on inner stars, 2 on the
/// last star and 1 or 3 on the first one according to `gamma_bits`.
pub fn build_j2m(m: u32, gamma_bits: &[bool]) -> Result<F2mLayout> {
    if gamma_bits.len() as u64 != u64::from(m) * u64::from(m) {
        return Err(Error::Invalid(alloc::format!("expected {} bits, got {}", m * m, gamma_bits.len())));
    }
    layout(m, |star, j| match star {
        0 if gamma_bits[(j - 1) as usize] => 3,
        0 => 1,
        s if s == m => 2,
        _ => 4,
    })
}

/// Two bit vectors of length `m²`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EqInstance {
    pub m: u32,
    pub xs: Vec<bool>,
    pub xr: Vec<bool>,
}

impl EqInstance {
    pub fn new(m: u32, xs: Vec<bool>, xr: Vec<bool>) -> Result<Self> {
        let len = (m * m) as usize;
        if xs.len() != len || xr.len() != len {
            return Err(Error::Invalid(alloc::format!("both vectors need {len} bits")));
        }
        Ok(EqInstance { m, xs, xr })
    }
}

/// MST-verification instance that is a yes-instance iff `xs == xr`.
pub fn eq_to_mst_instance(inst: &EqInstance) -> Result<(WeightedGraph, CandidateMarking)> {
    let f = build_j2m(inst.m, &inst.xs)?;
    let mask = f
        .kinds
        .iter()
        .map(|k| match *k {
            EdgeKind::Highway | EdgeKind::Path => true,
            EdgeKind::Spoke { star: 0, j } => !inst.xs[(j - 1) as usize],
            EdgeKind::Spoke { star, j } if star == inst.m => inst.xr[(j - 1) as usize],
            EdgeKind::Spoke { .. } => false,
        })
        .collect();
    Ok((f.graph, CandidateMarking::from_mask(mask)))
}

/// Disjoint union of a graph with a relabeled copy of itself.
#[derive(Clone, Debug)]
pub struct G2 {
    pub graph: WeightedGraph,
    pub marking: CandidateMarking,
    /// Added to every id to get the copy's id.
    pub offset: u32,
    /// Edge count of the original; copy-2 edge `e + m0` mirrors edge `e`.
    pub m0: usize,
}

impl G2 {
    pub fn copy_of(&self, v: VertexId) -> VertexId {
        VertexId(v.0 + self.offset)
    }
}

pub fn build_g2(g: &WeightedGraph, t: &CandidateMarking) -> Result<G2> {
    t.check(g)?;
    let max_id = g.ids().last().map_or(0, |v| v.0);
    let offset = (g.n() as u32).max(max_id + 1);
    let ids = g.ids().iter().copied().chain(g.ids().iter().map(|v| VertexId(v.0 + offset)));
    let shift = |v: VertexId| VertexId(v.0 + offset);
    let edges = g.edges().iter().map(|e| (e.u, e.v, e.weight)).chain(g.edges().iter().map(|e| (shift(e.u), shift(e.v), e.weight)));
    let graph = WeightedGraph::with_weight_bound(ids, edges, g.weight_bound())?;
    let mask = (0..2 * g.m()).map(|e| t.contains(e % g.m())).collect();
    Ok(G2 { graph, marking: CandidateMarking::from_mask(mask), offset, m0: g.m() })
}

/// `G^X`: replaces `e1 = (u, v)` of the first copy and `e2 = (z', w')` of
/// the second by `(u, w')` and `(v, z')`. Every vertex keeps its ports.
pub fn build_gx(g2: &G2, e1: EdgeId, e2: EdgeId) -> Result<(WeightedGraph, CandidateMarking)> {
    if e1 >= g2.m0 || e2 < g2.m0 || e2 >= 2 * g2.m0 {
        return Err(Error::Invalid("cross-wired edges must come one from each copy".into()));
    }
    if g2.marking.contains(e1) || g2.marking.contains(e2) {
        return Err(Error::Invalid("cross-wired edges must be outside the candidate".into()));
    }
    Ok((g2.graph.cross_wired(e1, e2)?, g2.marking.clone()))
}

/// What a verification protocol produced on one graph.
#[derive(Clone, Debug)]
pub struct Execution {
    /// `None` if the protocol gave up on the input.
    pub verdict: Option<bool>,
    pub trace: RoundTrace,
}

/// A spanning-tree verifier that can be run on arbitrary, possibly
/// disconnected, inputs.
pub trait StVerifier {
    fn execute(&self, g: &WeightedGraph, t: &CandidateMarking) -> Result<Execution>;
}

/// Leaf pruning over marked edges. A vertex with one live marked edge
/// prunes itself across it; a vertex left with none is a root. Any vertex
/// that is neither ends up on a cycle and rejects. Nothing is ever sent on
/// an unmarked edge, so disconnected candidates go unnoticed.
#[derive(Clone, Copy, Debug, Default)]
pub struct FrugalVerifier;

impl StVerifier for FrugalVerifier {
    fn execute(&self, g: &WeightedGraph, t: &CandidateMarking) -> Result<Execution> {
        let mut cfg = EngineConfig::for_graph(g);
        cfg.wakeup = Wakeup::Simultaneous;
        let mut net = Network::new(g, t, cfg)?;
        let n = net.n();
        let mut live: Vec<Vec<usize>> =
            net.views().iter().map(|v| (0..v.ports.len()).filter(|&p| v.ports[p].marked).collect()).collect();
        let mut done = alloc::vec![false; n];
        let awake = net.initial_wakeup();
        net.run_stage("prune", &awake, |i, ctx| {
            let heard: Vec<usize> = (0..ctx.degree()).filter(|&p| ctx.inbox()[p].is_some()).collect();
            live[i].retain(|p| !heard.contains(p));
            if !done[i] && live[i].len() <= 1 {
                done[i] = true;
                if let Some(&p) = live[i].first() {
                    ctx.send(p, crate::bits::Bits::from_bools([true]))?;
                }
            }
            ctx.halt();
            Ok(())
        })?;
        let (_, trace) = net.finish();
        Ok(Execution { verdict: Some(done.iter().all(|&d| d)), trace })
    }
}

/// The full verification protocol with simultaneous wakeup; on inputs it
/// cannot handle the verdict is `None` and the trace is what was sent
/// before it stopped.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullVerifier;

impl StVerifier for FullVerifier {
    fn execute(&self, g: &WeightedGraph, t: &CandidateMarking) -> Result<Execution> {
        let mut cfg = EngineConfig::for_graph(g);
        cfg.wakeup = Wakeup::Simultaneous;
        let (verdict, trace) = crate::verify::execute_unchecked(g, t, cfg)?;
        Ok(Execution { verdict, trace })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossWireReport {
    /// Unmarked edges that carried no message in the run on `G²`, as
    /// endpoint ids.
    pub silent_edges: Vec<(VertexId, VertexId)>,
    /// The chosen pair, one edge per copy, if a weight-matched pair of silent
    /// edges exists.
    pub crossed: Option<((VertexId, VertexId), (VertexId, VertexId))>,
    pub traces_similar: Option<bool>,
    pub gx_verdict: Option<bool>,
}

impl CrossWireReport {
    pub fn applicable(&self) -> bool {
        self.crossed.is_some()
    }
}

/// Runs `protocol` on `G²`, cross-wires two silent unmarked edges, one from
/// each copy, runs it again on `G^X` and compares the two traces.
pub fn cross_wire_experiment(g: &WeightedGraph, t: &CandidateMarking, protocol: &dyn StVerifier) -> Result<CrossWireReport> {
    if !crate::oracle::is_spanning_tree(g, t) {
        return Err(Error::Invalid("candidate must be a spanning tree".into()));
    }
    let g2 = build_g2(g, t)?;
    let first = protocol.execute(&g2.graph, &g2.marking)?;
    let silent: Vec<EdgeId> = (0..g2.graph.m())
        .filter(|&e| {
            let edge = g2.graph.edge(e);
            !g2.marking.contains(e) && first.trace.count_on_edge(edge.u, edge.v) == 0
        })
        .collect();
    let ends = |e: EdgeId| (g2.graph.edge(e).u, g2.graph.edge(e).v);
    let mut report = CrossWireReport {
        silent_edges: silent.iter().map(|&e| ends(e)).collect(),
        crossed: None,
        traces_similar: None,
        gx_verdict: None,
    };
    let weight = |e: EdgeId| g2.graph.edge(e).weight;
    let pair = silent.iter().filter(|&&e| e < g2.m0).find_map(|&e1| {
        let twin = e1 + g2.m0;
        let e2 = if silent.contains(&twin) {
            Some(twin)
        } else {
            silent.iter().copied().find(|&e| e >= g2.m0 && weight(e) == weight(e1))
        };
        e2.map(|e2| (e1, e2))
    });
    let Some((e1, e2)) = pair else { return Ok(report) };
    let (gx, tx) = build_gx(&g2, e1, e2)?;
    let second = protocol.execute(&gx, &tx)?;
    let ((u, v), (z, w)) = (ends(e1), ends(e2));
    let map = BTreeMap::from([((u, v), (u, w)), ((v, u), (v, z)), ((z, w), (z, v)), ((w, z), (w, u))]);
    report.crossed = Some(((u, v), (z, w)));
    report.traces_similar = Some(traces_similar(&first.trace, &second.trace, &map));
    report.gx_verdict = second.verdict;
    Ok(report)
}
