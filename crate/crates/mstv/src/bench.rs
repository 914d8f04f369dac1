//! Benchmark sweeps over random instances.

use anyhow::Result;
use mstv_core::oracle::is_mst;
use mstv_core::sim::{EngineConfig, Wakeup};
use mstv_core::verify::{verify_mst_distributed, VerifyOutcome};
use rayon::prelude::*;

use crate::generate::{candidate, edges_for_degree, random_connected, rng, Candidate};
use crate::report::BenchRow;

#[derive(Clone, Debug)]
pub struct Sweep {
    pub sizes: Vec<u32>,
    pub seeds: Vec<u64>,
    pub avg_deg: f64,
    /// Weight bound; `None` means `n²`.
    pub wmax: Option<u64>,
    pub candidate: Candidate,
    pub simultaneous: bool,
    pub bits: Option<u32>,
    pub max_rounds: Option<u64>,
}

/// Result of one run, with the oracle's opinion.
#[derive(Clone, Debug)]
pub struct BenchRun {
    pub row: BenchRow,
    pub outcome: VerifyOutcome,
    pub oracle: bool,
    pub bits: u32,
}

impl BenchRun {
    pub fn agrees(&self) -> bool {
        self.outcome.verdict == self.oracle
    }
}

pub fn run_one(sweep: &Sweep, n: u32, seed: u64) -> Result<BenchRun> {
    let mut r = rng(seed ^ (u64::from(n) << 32));
    let wmax = sweep.wmax.unwrap_or(u64::from(n) * u64::from(n));
    let g = random_connected(n, edges_for_degree(n, sweep.avg_deg), wmax, &mut r)?;
    let t = candidate(&g, sweep.candidate, &mut r);
    let mut cfg = EngineConfig::for_graph(&g);
    cfg.record_trace = false;
    cfg.seed = seed;
    if sweep.simultaneous {
        cfg.wakeup = Wakeup::Simultaneous;
    }
    if let Some(b) = sweep.bits {
        cfg.bits = b;
    }
    if let Some(m) = sweep.max_rounds {
        cfg.max_rounds = m;
    }
    let bits = cfg.bits;
    let outcome = verify_mst_distributed(&g, &t, cfg)?;
    let oracle = is_mst(&g, &t)?;
    let row = BenchRow {
        n: g.n(),
        m_edges: g.m(),
        diameter: g.diameter().unwrap_or(0),
        k: outcome.stats.k,
        f: outcome.stats.fragments,
        rounds: outcome.metrics.rounds,
        messages: outcome.metrics.messages,
        verdict: outcome.verdict,
        seed,
    };
    Ok(BenchRun { row, outcome, oracle, bits })
}

/// All runs in sweep order (sizes outer, seeds inner), computed in parallel.
pub fn run_sweep(sweep: &Sweep) -> Result<Vec<BenchRun>> {
    let jobs: Vec<(u32, u64)> = sweep.sizes.iter().flat_map(|&n| sweep.seeds.iter().map(move |&s| (n, s))).collect();
    jobs.par_iter().map(|&(n, s)| run_one(sweep, n, s)).collect()
}
