//! Text formats for graphs, candidate markings and traces.
//!
//! A graph file has `n m` on its first line and then one `u v w` line per
//! edge; vertices are `0..n`. A marking file lists one marked edge `u v` per
//! line. Blank lines and lines starting with `#` are ignored on input.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use mstv_core::graph::default_weight_bound;
use mstv_core::sim::RoundTrace;
use mstv_core::{CandidateMarking, VertexId, WeightedGraph};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn fields<const N: usize>(line: &str, lineno: usize) -> Result<[u64; N]> {
    let mut out = [0u64; N];
    let mut parts = line.split_whitespace();
    for slot in &mut out {
        let tok = parts.next().ok_or_else(|| anyhow!("line {lineno}: expected {N} fields"))?;
        *slot = tok.parse().with_context(|| format!("line {lineno}: bad number {tok:?}"))?;
    }
    if parts.next().is_some() {
        bail!("line {lineno}: expected {N} fields");
    }
    Ok(out)
}

fn vertex(x: u64, lineno: usize) -> Result<VertexId> {
    u32::try_from(x).map(VertexId).map_err(|_| anyhow!("line {lineno}: vertex {x} out of range"))
}

/// The weight bound is `n²`, raised to the largest weight if that is bigger.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = content_lines(text);
    let (lineno, header) = lines.next().ok_or_else(|| anyhow!("empty graph file"))?;
    let [n, m] = fields::<2>(header, lineno)?;
    let n = u32::try_from(n).map_err(|_| anyhow!("line {lineno}: n too large"))?;
    let mut edges = Vec::with_capacity(m as usize);
    for (lineno, line) in lines {
        let [u, v, w] = fields::<3>(line, lineno)?;
        edges.push((vertex(u, lineno)?, vertex(v, lineno)?, w));
    }
    if edges.len() as u64 != m {
        bail!("header announces {m} edges, file has {}", edges.len());
    }
    let bound = edges.iter().map(|e| e.2).max().unwrap_or(0).max(default_weight_bound(n as usize));
    Ok(WeightedGraph::with_weight_bound((0..n).map(VertexId), edges, bound)?)
}

pub fn format_graph(g: &WeightedGraph) -> Result<String> {
    if g.ids().iter().enumerate().any(|(i, v)| v.0 as usize != i) {
        bail!("graph files need vertex ids 0..n");
    }
    let mut out = format!("{} {}\n", g.n(), g.m());
    for e in g.edges() {
        writeln!(out, "{} {} {}", e.u, e.v, e.weight)?;
    }
    Ok(out)
}

pub fn parse_marking(g: &WeightedGraph, text: &str) -> Result<CandidateMarking> {
    let mut t = CandidateMarking::empty(g);
    for (lineno, line) in content_lines(text) {
        let [u, v] = fields::<2>(line, lineno)?;
        let (u, v) = (vertex(u, lineno)?, vertex(v, lineno)?);
        let e = g.edge_between(u, v).ok_or_else(|| anyhow!("line {lineno}: no edge {u} {v} in graph"))?;
        t.set(e, true);
    }
    Ok(t)
}

pub fn format_marking(g: &WeightedGraph, t: &CandidateMarking) -> String {
    let mut out = String::new();
    for e in t.edges() {
        let edge = g.edge(e);
        let _ = writeln!(out, "{} {}", edge.u, edge.v);
    }
    out
}

/// One `round src dst hex` line per message.
pub fn format_trace(trace: &RoundTrace) -> String {
    let mut out = String::new();
    for m in &trace.messages {
        let _ = writeln!(out, "{} {} {} {}", m.round, m.src, m.dst, m.payload.to_hex());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let text = "4 4\n0 1 3\n1 2 0\n2 3 16\n0 3 7\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(format_graph(&g).unwrap(), text);
        let t = parse_marking(&g, "0 1\n# comment\n\n3 2\n").unwrap();
        assert_eq!(format_marking(&g, &t), "0 1\n2 3\n");
    }

    #[test]
    fn heavy_weights_raise_the_bound() {
        let g = parse_graph("2 1\n0 1 1000\n").unwrap();
        assert_eq!(g.weight_bound(), 1000);
    }

    #[test]
    fn diagnostics() {
        assert!(parse_graph("").is_err());
        assert!(parse_graph("2 2\n0 1 1\n").is_err());
        assert!(parse_graph("2 1\n0 x 1\n").unwrap_err().to_string().contains("line 2"));
        assert!(parse_graph("2 1\n0 2 1\n").is_err());
        let g = parse_graph("3 2\n0 1 1\n1 2 1\n").unwrap();
        assert!(parse_marking(&g, "0 2\n").unwrap_err().to_string().contains("no edge"));
        assert!(parse_marking(&g, "0 1 5\n").is_err());
    }
}
