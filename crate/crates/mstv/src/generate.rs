//! Seeded instance generators.

use std::collections::BTreeSet;

use anyhow::{bail, Result};
use mstv_core::oracle::{is_spanning_tree, mst_oracle};
use mstv_core::{CandidateMarking, EdgeId, VertexId, WeightedGraph};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform labeled tree on `0..n` from a random Prüfer sequence.
pub fn random_tree(n: u32, rng: &mut impl Rng) -> Vec<(u32, u32)> {
    if n < 2 {
        return Vec::new();
    }
    let seq: Vec<u32> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1u32; n as usize];
    for &x in &seq {
        degree[x as usize] += 1;
    }
    let mut leaves: BTreeSet<u32> = (0..n).filter(|&v| degree[v as usize] == 1).collect();
    let mut edges = Vec::with_capacity(n as usize - 1);
    for &x in &seq {
        let leaf = leaves.pop_first().expect("a Prüfer sequence always leaves a leaf");
        edges.push((leaf, x));
        degree[x as usize] -= 1;
        if degree[x as usize] == 1 {
            leaves.insert(x);
        }
    }
    let rest: Vec<u32> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Connected graph on `0..n`: a uniform spanning tree plus distinct extra
/// edges up to `edges` in total, weights uniform in `0..=wmax`.
pub fn random_connected(n: u32, edges: usize, wmax: u64, rng: &mut impl Rng) -> Result<WeightedGraph> {
    if n == 0 {
        bail!("need at least one vertex");
    }
    let all = n as usize * (n as usize - 1) / 2;
    let target = edges.clamp(n as usize - 1, all);
    let mut have: BTreeSet<(u32, u32)> = random_tree(n, rng).into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    let extra = target - have.len();
    if extra > 0 && 2 * target > all {
        let free: Vec<(u32, u32)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|p| !have.contains(p)).collect();
        have.extend(free.into_iter().choose_multiple(rng, extra));
    } else {
        while have.len() < target {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                have.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut list: Vec<(u32, u32)> = have.into_iter().collect();
    list.shuffle(rng);
    let weighted = list.into_iter().map(|(a, b)| (VertexId(a), VertexId(b), rng.gen_range(0..=wmax)));
    Ok(WeightedGraph::with_weight_bound((0..n).map(VertexId), weighted, wmax.max(1))?)
}

/// Edge count for an average degree.
pub fn edges_for_degree(n: u32, avg_deg: f64) -> usize {
    (f64::from(n) * avg_deg / 2.0).round() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    /// The minimum spanning tree.
    Mst,
    /// The MST with one edge exchanged for a non-tree edge on its cycle.
    Swapped,
    /// The MST minus one edge.
    Forest,
    /// The MST plus one non-tree edge.
    Cycle,
    /// Every edge independently with probability one half.
    Random,
}

impl Candidate {
    pub const ALL: [Candidate; 5] = [Candidate::Mst, Candidate::Swapped, Candidate::Forest, Candidate::Cycle, Candidate::Random];
}

/// A marking of the requested kind. Kinds that need a non-tree edge fall
/// back to the MST when the graph is a tree.
pub fn candidate(g: &WeightedGraph, kind: Candidate, rng: &mut impl Rng) -> CandidateMarking {
    let mst = mst_oracle(g, &CandidateMarking::empty(g)).expect("generated graphs are connected");
    let chords: Vec<EdgeId> = (0..g.m()).filter(|e| !mst.contains(e)).collect();
    let with = |edges: Vec<EdgeId>| CandidateMarking::from_edges(g, edges);
    match kind {
        Candidate::Mst => with(mst),
        Candidate::Forest if !mst.is_empty() => {
            let drop = *mst.choose(rng).expect("nonempty");
            with(mst.into_iter().filter(|&e| e != drop).collect())
        }
        Candidate::Cycle if !chords.is_empty() => {
            let add = *chords.choose(rng).expect("nonempty");
            with(mst.into_iter().chain([add]).collect())
        }
        Candidate::Swapped if !chords.is_empty() => {
            let add = *chords.choose(rng).expect("nonempty");
            let mut order = mst.clone();
            order.shuffle(rng);
            for drop in order {
                let t = with(mst.iter().copied().filter(|&e| e != drop).chain([add]).collect());
                if is_spanning_tree(g, &t) {
                    return t;
                }
            }
            unreachable!("some tree edge lies on the cycle of every chord")
        }
        Candidate::Random => CandidateMarking::from_mask((0..g.m()).map(|_| rng.gen_bool(0.5)).collect()),
        _ => with(mst),
    }
}
