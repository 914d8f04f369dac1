//! Deterministic synchronous round engine.
//!
//! A [`Network`] runs a sequence of stages on one graph. In every round
//! each awake node reads what was sent to it in the previous round and may
//! send at most one payload of at most `B` bits on each incident port. A
//! stage ends at the first round in which no node is awake and no message
//! is in flight; the next stage starts in that same round. Nodes are
//! stepped in ascending id order and the trace is kept in canonical
//! `(round, src, dst)` order, so identical inputs give identical traces.

mod link;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

pub use link::{fragment_payload, reassemble, LinkCtx};

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::graph::{CandidateMarking, VertexId, WeightedGraph, Widths};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Wakeup {
    /// Only this vertex is awake at round 0; others wake on first receipt.
    SingleSource(VertexId),
    Simultaneous,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Bits per message.
    pub bits: u32,
    pub wakeup: Wakeup,
    pub max_rounds: u64,
    pub seed: u64,
    pub record_trace: bool,
}

impl EngineConfig {
    /// Default budget `id + weight + 8` bits, single source at the minimum id.
    pub fn for_graph(g: &WeightedGraph) -> Self {
        EngineConfig {
            bits: default_bits(g),
            wakeup: Wakeup::SingleSource(g.id(0)),
            max_rounds: 10_000_000,
            seed: 0,
            record_trace: true,
        }
    }
}

pub fn default_bits(g: &WeightedGraph) -> u32 {
    let w = g.widths();
    w.id + w.weight + 8
}

/// One payload on one directed edge.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Message {
    pub round: u64,
    pub src: VertexId,
    pub dst: VertexId,
    pub payload: Bits,
}

/// Full message history in `(round, src, dst)` order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct RoundTrace {
    pub messages: Vec<Message>,
}

impl RoundTrace {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Number of messages sent over the undirected edge `{a, b}`.
    pub fn count_on_edge(&self, a: VertexId, b: VertexId) -> usize {
        self.messages
            .iter()
            .filter(|m| (m.src == a && m.dst == b) || (m.src == b && m.dst == a))
            .count()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct PhaseMetrics {
    pub rounds: u64,
    pub messages: u64,
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Metrics {
    pub rounds: u64,
    pub messages: u64,
    pub max_payload_bits: usize,
    pub phases: BTreeMap<String, PhaseMetrics>,
}

/// What a node knows before any communication.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalView {
    pub id: VertexId,
    pub ports: Vec<PortInfo>,
    /// Private randomness derived from the run seed.
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PortInfo {
    pub weight: u64,
    pub marked: bool,
}

/// A node state machine driven one round at a time.
pub trait NodeProtocol {
    fn step(&mut self, ctx: &mut Ctx<'_>) -> Result<()>;
}

/// Per-round interface handed to a node.
pub struct Ctx<'a> {
    round: u64,
    view: &'a LocalView,
    widths: Widths,
    bits: u32,
    inbox: &'a [Option<Bits>],
    out: &'a mut Vec<(usize, Bits)>,
    halted: bool,
}

impl<'a> Ctx<'a> {
    /// Round number within the current stage.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn view(&self) -> &LocalView {
        self.view
    }

    pub fn id(&self) -> VertexId {
        self.view.id
    }

    pub fn degree(&self) -> usize {
        self.view.ports.len()
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    /// The per-message budget `B`.
    pub fn budget(&self) -> u32 {
        self.bits
    }

    /// Payloads received this round, indexed by port.
    pub fn inbox(&self) -> &[Option<Bits>] {
        self.inbox
    }

    pub fn send(&mut self, port: usize, payload: Bits) -> Result<()> {
        if port >= self.view.ports.len() {
            return Err(Error::NoSuchPort { vertex: self.view.id, port });
        }
        if self.out.iter().any(|(p, _)| *p == port) {
            return Err(Error::DuplicateSend { src: self.view.id, port, round: self.round });
        }
        self.out.push((port, payload));
        Ok(())
    }

    /// Go idle until the next message arrives.
    pub fn halt(&mut self) {
        self.halted = true;
    }
}

/// Nodes, metrics and trace of a completed run.
pub struct RunResult<P> {
    pub nodes: Vec<P>,
    pub metrics: Metrics,
    pub trace: RoundTrace,
}

/// Runs one protocol to quiescence on `(g, t)` as a single stage.
pub fn run<P: NodeProtocol>(
    g: &WeightedGraph,
    t: &CandidateMarking,
    cfg: &EngineConfig,
    mut factory: impl FnMut(&LocalView) -> P,
) -> Result<RunResult<P>> {
    let mut net = Network::new(g, t, cfg.clone())?;
    let mut nodes: Vec<P> = net.views.iter().map(&mut factory).collect();
    let awake = net.initial_wakeup();
    net.run_stage("run", &awake, |i, ctx| nodes[i].step(ctx))?;
    let (metrics, trace) = net.finish();
    Ok(RunResult { nodes, metrics, trace })
}

/// A simulation session: one graph, one budget, one clock, many stages.
pub struct Network<'g> {
    g: &'g WeightedGraph,
    cfg: EngineConfig,
    widths: Widths,
    views: Vec<LocalView>,
    /// `peer[i][p]` = (neighbor index, port of the edge at the neighbor).
    peer: Vec<Vec<(usize, usize)>>,
    clock: u64,
    metrics: Metrics,
    trace: RoundTrace,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl<'g> Network<'g> {
    pub fn new(g: &'g WeightedGraph, t: &CandidateMarking, cfg: EngineConfig) -> Result<Self> {
        t.check(g)?;
        let widths = g.widths();
        let required = widths.id + widths.weight;
        if cfg.bits < required {
            return Err(Error::BudgetTooSmall { bits: cfg.bits, required });
        }
        if let Wakeup::SingleSource(s) = cfg.wakeup {
            g.index_of(s).ok_or(Error::UnknownVertex(s))?;
        }
        let views = (0..g.n())
            .map(|i| LocalView {
                id: g.id(i),
                ports: g
                    .ports(i)
                    .iter()
                    .map(|p| PortInfo { weight: g.edge(p.edge).weight, marked: t.contains(p.edge) })
                    .collect(),
                seed: splitmix64(cfg.seed ^ splitmix64(u64::from(g.id(i).0))),
            })
            .collect();
        let peer = (0..g.n())
            .map(|i| {
                g.ports(i)
                    .iter()
                    .map(|p| {
                        let j = p.neighbor;
                        let q = g.ports(j).iter().position(|x| x.edge == p.edge).unwrap_or(0);
                        (j, q)
                    })
                    .collect()
            })
            .collect();
        Ok(Network { g, cfg, widths, views, peer, clock: 0, metrics: Metrics::default(), trace: RoundTrace::default() })
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.g
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    pub fn budget(&self) -> u32 {
        self.cfg.bits
    }

    pub fn n(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[LocalView] {
        &self.views
    }

    pub fn view(&self, i: usize) -> &LocalView {
        &self.views[i]
    }

    /// Rounds elapsed so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Awake set at round 0 under the configured wakeup mode.
    pub fn initial_wakeup(&self) -> Vec<bool> {
        match self.cfg.wakeup {
            Wakeup::Simultaneous => alloc::vec![true; self.n()],
            Wakeup::SingleSource(s) => self.views.iter().map(|v| v.id == s).collect(),
        }
    }

    /// Runs one stage to quiescence and returns the number of rounds it took.
    /// `step(i, ctx)` acts as node `i`, which starts awake iff `awake[i]`.
    pub fn run_stage(
        &mut self,
        phase: &str,
        awake: &[bool],
        mut step: impl FnMut(usize, &mut Ctx<'_>) -> Result<()>,
    ) -> Result<u64> {
        let n = self.n();
        let mut active: Vec<bool> = awake.to_vec();
        active.resize(n, false);
        let mut inbox: Vec<Vec<Option<Bits>>> = self.peer.iter().map(|p| alloc::vec![None; p.len()]).collect();
        let mut mail = alloc::vec![false; n];
        let mut next_inbox = inbox.clone();
        let mut next_mail = mail.clone();
        let mut out: Vec<(usize, Bits)> = Vec::new();
        let mut sent: Vec<Message> = Vec::new();
        let mut round = 0u64;
        let mut last = 0u64;
        let mut stage_messages = 0u64;
        loop {
            let mut any = false;
            for i in 0..n {
                if !active[i] && !mail[i] {
                    continue;
                }
                any = true;
                out.clear();
                let mut ctx = Ctx {
                    round,
                    view: &self.views[i],
                    widths: self.widths,
                    bits: self.cfg.bits,
                    inbox: &inbox[i],
                    out: &mut out,
                    halted: false,
                };
                step(i, &mut ctx)?;
                active[i] = !ctx.halted;
                out.sort_by_key(|(p, _)| self.views[self.peer[i][*p].0].id);
                for (p, payload) in out.drain(..) {
                    let (j, q) = self.peer[i][p];
                    if payload.len() > self.cfg.bits as usize {
                        return Err(Error::CongestBudget {
                            src: self.views[i].id,
                            dst: self.views[j].id,
                            round: self.clock + round,
                            bits: payload.len(),
                            budget: self.cfg.bits,
                        });
                    }
                    self.metrics.max_payload_bits = self.metrics.max_payload_bits.max(payload.len());
                    stage_messages += 1;
                    if self.cfg.record_trace {
                        sent.push(Message {
                            round: self.clock + round,
                            src: self.views[i].id,
                            dst: self.views[j].id,
                            payload: payload.clone(),
                        });
                    }
                    next_inbox[j][q] = Some(payload);
                    next_mail[j] = true;
                }
                if mail[i] {
                    inbox[i].iter_mut().for_each(|m| *m = None);
                    mail[i] = false;
                }
            }
            if !any {
                break;
            }
            last = round;
            self.trace.messages.append(&mut sent);
            core::mem::swap(&mut inbox, &mut next_inbox);
            core::mem::swap(&mut mail, &mut next_mail);
            round += 1;
            if self.clock + round > self.cfg.max_rounds {
                return Err(Error::Nontermination { max_rounds: self.cfg.max_rounds });
            }
        }
        self.clock += last;
        self.metrics.rounds = self.clock;
        self.metrics.messages += stage_messages;
        let entry = self.metrics.phases.entry(String::from(phase)).or_default();
        entry.rounds += last;
        entry.messages += stage_messages;
        Ok(last)
    }

    /// Like [`Network::run_stage`] but with arbitrary-length payloads,
    /// split into `B`-bit chunks and delivered when the last chunk lands.
    pub fn run_link_stage(
        &mut self,
        phase: &str,
        awake: &[bool],
        step: impl FnMut(usize, &mut LinkCtx<'_>) -> Result<()>,
    ) -> Result<u64> {
        link::run_link_stage(self, phase, awake, step)
    }

    pub fn finish(self) -> (Metrics, RoundTrace) {
        (self.metrics, self.trace)
    }
}

/// `t2` equals `t1` after rewriting each directed edge through `edge_map`.
/// Edges missing from the map are kept as they are.
pub fn traces_similar(
    t1: &RoundTrace,
    t2: &RoundTrace,
    edge_map: &BTreeMap<(VertexId, VertexId), (VertexId, VertexId)>,
) -> bool {
    if t1.len() != t2.len() {
        return false;
    }
    let mut mapped: Vec<(u64, VertexId, VertexId, &Bits)> = t1
        .messages
        .iter()
        .map(|m| {
            let (s, d) = edge_map.get(&(m.src, m.dst)).copied().unwrap_or((m.src, m.dst));
            (m.round, s, d, &m.payload)
        })
        .collect();
    mapped.sort();
    mapped.iter().zip(&t2.messages).all(|(a, b)| a.0 == b.round && a.1 == b.src && a.2 == b.dst && *a.3 == b.payload)
}
