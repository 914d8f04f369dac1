use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedGraph;

/// Random tree on `0..n` plus `extra` random chords, weights in `0..=wmax`.
pub fn random_connected(n: u32, extra: usize, wmax: u64, seed: u64) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(u32, u32, u64)> = Vec::new();
    let mut have = alloc::collections::BTreeSet::new();
    for i in 1..n as usize {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        have.insert((a.min(b), a.max(b)));
        edges.push((a, b, rng.gen_range(0..=wmax)));
    }
    let max_edges = (n as usize * (n as usize - 1)) / 2;
    let mut tries = 0;
    while edges.len() < (n as usize - 1 + extra).min(max_edges) && tries < 100 * (extra + 1) {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || !have.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a, b, rng.gen_range(0..=wmax)));
    }
    WeightedGraph::with_weight_bound((0..n).map(crate::VertexId), edges.into_iter().map(|(a, b, w)| (crate::VertexId(a), crate::VertexId(b), w)), wmax.max(1))
        .unwrap()
}
