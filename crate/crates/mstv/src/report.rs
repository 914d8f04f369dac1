//! Machine-readable results.

use std::collections::BTreeMap;

use mstv_core::gadgets::CrossWireReport;
use mstv_core::sim::Metrics;
use mstv_core::verify::VerifyOutcome;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseJson {
    pub rounds: u64,
    pub messages: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricsJson {
    pub rounds: u64,
    pub messages: u64,
    pub max_payload_bits: usize,
    pub phases: BTreeMap<String, PhaseJson>,
}

impl From<&Metrics> for MetricsJson {
    fn from(m: &Metrics) -> Self {
        MetricsJson {
            rounds: m.rounds,
            messages: m.messages,
            max_payload_bits: m.max_payload_bits,
            phases: m.phases.iter().map(|(k, p)| (k.clone(), PhaseJson { rounds: p.rounds, messages: p.messages })).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyJson {
    pub verdict: bool,
    pub rejected_at: Option<&'static str>,
    pub rounds: u64,
    pub messages: u64,
    pub max_payload_bits: usize,
    pub bits: u32,
    pub phases: BTreeMap<String, PhaseJson>,
    pub oracle_verdict: bool,
    pub k: u64,
    pub fragments: u64,
}

impl VerifyJson {
    pub fn new(out: &VerifyOutcome, bits: u32, oracle_verdict: bool) -> Self {
        let m = MetricsJson::from(&out.metrics);
        VerifyJson {
            verdict: out.verdict,
            rejected_at: out.rejected_at,
            rounds: m.rounds,
            messages: m.messages,
            max_payload_bits: m.max_payload_bits,
            bits,
            phases: m.phases,
            oracle_verdict,
            k: out.stats.k,
            fragments: out.stats.fragments,
        }
    }
}

/// One benchmark run. Column order is the CSV order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m_edges: usize,
    #[serde(rename = "D")]
    pub diameter: u32,
    pub k: u64,
    pub f: u64,
    pub rounds: u64,
    pub messages: u64,
    pub verdict: bool,
    pub seed: u64,
}

impl BenchRow {
    pub const HEADER: &'static str = "n,m_edges,D,k,f,rounds,messages,verdict,seed";

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n, self.m_edges, self.diameter, self.k, self.f, self.rounds, self.messages, self.verdict, self.seed
        )
    }

    fn log_factor(&self) -> f64 {
        let l = 1.0 + (self.n as f64).log2();
        l * l
    }

    /// `rounds / ((√n + D)(1 + log₂ n)²)`.
    pub fn round_ratio(&self) -> f64 {
        self.rounds as f64 / (((self.n as f64).sqrt() + f64::from(self.diameter)) * self.log_factor())
    }

    /// `messages / (m (1 + log₂ n)²)`.
    pub fn message_ratio(&self) -> f64 {
        self.messages as f64 / (self.m_edges as f64 * self.log_factor())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub runs: usize,
    pub mean_round_ratio: f64,
    pub mean_message_ratio: f64,
    /// `rounds / (√n + D)` without the log factor.
    pub mean_rounds_per_sqrt_n_plus_d: f64,
}

/// Per-size means, in increasing `n`.
pub fn summarize(rows: &[BenchRow]) -> Vec<SizeSummary> {
    let mut by_n: BTreeMap<usize, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let mean = |f: &dyn Fn(&BenchRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64;
            SizeSummary {
                n,
                runs: rs.len(),
                mean_round_ratio: mean(&|r| r.round_ratio()),
                mean_message_ratio: mean(&|r| r.message_ratio()),
                mean_rounds_per_sqrt_n_plus_d: mean(&|r| r.rounds as f64 / ((r.n as f64).sqrt() + f64::from(r.diameter))),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossWireJson {
    pub silent_edges: Vec<(u32, u32)>,
    pub crossed: Option<[(u32, u32); 2]>,
    pub traces_similar: Option<bool>,
    pub gx_verdict: Option<bool>,
}

impl From<&CrossWireReport> for CrossWireJson {
    fn from(r: &CrossWireReport) -> Self {
        CrossWireJson {
            silent_edges: r.silent_edges.iter().map(|(a, b)| (a.0, b.0)).collect(),
            crossed: r.crossed.map(|(a, b)| [(a.0 .0, a.1 .0), (b.0 .0, b.1 .0)]),
            traces_similar: r.traces_similar,
            gx_verdict: r.gx_verdict,
        }
    }
}
