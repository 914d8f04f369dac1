//! Command line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mstv_core::gadgets::{
    build_f2m, build_g2, build_gx, build_j2m, cross_wire_experiment, eq_to_mst_instance, EqInstance, FrugalVerifier,
    FullVerifier, StVerifier,
};
use mstv_core::oracle::is_mst;
use mstv_core::sim::{EngineConfig, Wakeup};
use mstv_core::verify::verify_mst_distributed;
use mstv_core::{CandidateMarking, WeightedGraph};
use rand::Rng;

use crate::bench::{run_sweep, Sweep};
use crate::generate::{candidate, edges_for_degree, random_connected, rng, Candidate};
use crate::io::{format_graph, format_marking, format_trace, parse_graph, parse_marking};
use crate::report::{summarize, BenchRow, CrossWireJson, MetricsJson, VerifyJson};

/// Exit status when the protocol and the oracle disagree.
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mstv", version, about = "Distributed MST verification in a simulated CONGEST network")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Bits per message; defaults to id width + weight width + 8.
    #[arg(long, global = true)]
    bits: Option<u32>,

    /// Abort a run that has not gone quiet after this many rounds.
    #[arg(long, global = true)]
    max_rounds: Option<u64>,

    /// Output format for results printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a graph (and optionally a candidate marking) to files.
    #[command(subcommand)]
    Gen(Gen),
    /// Run the protocol and the centralized oracle on one instance.
    ///
    /// JSON output: {verdict, rejected_at, rounds, messages, max_payload_bits,
    /// bits, phases: {step: {rounds, messages}}, oracle_verdict, k, fragments}.
    /// CSV output: verdict,rejected_at,rounds,messages,oracle_verdict.
    /// Exit status 0 if protocol and oracle agree, 2 if they disagree, 1 on
    /// any other error.
    Verify(VerifyArgs),
    /// Sweep random instances and report per-run metrics.
    ///
    /// CSV columns: n,m_edges,D,k,f,rounds,messages,verdict,seed (D is the
    /// exact diameter). The companion JSON holds {rows, phases, summary}
    /// where phases lists per-step metrics of every run and summary has,
    /// per n, the mean of rounds/((sqrt n + D)(1 + log2 n)^2), of
    /// messages/(m (1 + log2 n)^2) and of rounds/(sqrt n + D).
    /// Exit status 2 if any run disagrees with the oracle.
    Bench(BenchArgs),
    /// Lower-bound constructions and experiments.
    #[command(subcommand)]
    Lowerbound(Lowerbound),
}

#[derive(Args, Debug)]
struct Output {
    /// Graph file to write; `-` for stdout.
    #[arg(long, default_value = "-")]
    out: PathBuf,
    /// Candidate marking file to write.
    #[arg(long)]
    marking_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// Connected random graph: uniform spanning tree plus random edges.
    Random {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 4.0)]
        avg_deg: f64,
        /// Largest weight; defaults to n².
        #[arg(long)]
        wmax: Option<u64>,
        #[arg(long, value_enum, default_value_t = Candidate::Mst)]
        candidate: Candidate,
        #[command(flatten)]
        output: Output,
    },
    /// The unweighted lower-bound graph on m² paths and an m+1 highway.
    F2m {
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Weighted lower-bound graph; first-star spoke j weighs 3 if bit j of
    /// --gamma is 1, else 1. With --xr the marking encodes the equality
    /// instance (gamma, xr).
    J2m {
        #[arg(long)]
        m: u32,
        /// m² bits as 0/1 characters; random if absent.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        xr: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Disjoint union of a graph with a shifted copy.
    G2 {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        marking: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Two-copy graph with one unmarked edge cross-wired to its twin.
    Gx {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        marking: PathBuf,
        /// Unmarked edge `u v` of the original graph; the first one if absent.
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        edge: Option<Vec<u32>>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    marking: PathBuf,
    /// Wake every vertex at round 0 and elect a leader first.
    #[arg(long)]
    simultaneous: bool,
    /// Write the message trace, one `round src dst hex` line per message.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Vertex counts to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [64u32, 256, 1024])]
    sizes: Vec<u32>,
    /// Runs per size; seeds are --seed, --seed + 1, ...
    #[arg(long, default_value_t = 5)]
    runs: u64,
    #[arg(long, default_value_t = 4.0)]
    avg_deg: f64,
    #[arg(long)]
    wmax: Option<u64>,
    #[arg(long, value_enum, default_value_t = Candidate::Mst)]
    candidate: Candidate,
    #[arg(long)]
    simultaneous: bool,
    /// CSV file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Companion JSON file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Lowerbound {
    /// Equality instances as MST verification on the weighted lower-bound
    /// graph. Without --xs/--xr, runs every pair of m²-bit vectors (m ≤ 2).
    Reduction {
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[arg(long, requires = "xr")]
        xs: Option<String>,
        #[arg(long, requires = "xs")]
        xr: Option<String>,
    },
    /// Runs a verifier on two disjoint copies, cross-wires two silent
    /// unmarked edges and compares the traces. JSON output:
    /// {silent_edges, crossed, traces_similar, gx_verdict}.
    Crosswire {
        /// Graph file; a random graph with a spanning-tree marking if absent.
        #[arg(long, requires = "marking")]
        graph: Option<PathBuf>,
        #[arg(long)]
        marking: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        n: u32,
        #[arg(long, value_enum, default_value_t = Protocol::Frugal)]
        protocol: Protocol,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Protocol {
    /// Leaf pruning over marked edges only.
    Frugal,
    /// The full verification protocol.
    Full,
}

/// Failure that maps to a specific exit status.
#[derive(Debug)]
struct Mismatch(String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Mismatch {}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run(args: impl IntoIterator<Item = OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if e.downcast_ref::<Mismatch>().is_some() {
                EXIT_MISMATCH
            } else {
                1
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_to(path: &Path, text: &str, stdout: &mut dyn Write) -> Result<()> {
    if path.as_os_str() == "-" {
        stdout.write_all(text.as_bytes())?;
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn load(graph: &Path, marking: &Path) -> Result<(WeightedGraph, CandidateMarking)> {
    let g = parse_graph(&read(graph)?).with_context(|| format!("in {}", graph.display()))?;
    let t = parse_marking(&g, &read(marking)?).with_context(|| format!("in {}", marking.display()))?;
    Ok((g, t))
}

fn parse_bits(s: &str, len: usize) -> Result<Vec<bool>> {
    let bits: Vec<bool> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(anyhow!("bit strings use only 0 and 1, got {c:?}")),
        })
        .collect::<Result<_>>()?;
    if bits.len() != len {
        bail!("expected {len} bits, got {}", bits.len());
    }
    Ok(bits)
}

fn emit(output: &Output, g: &WeightedGraph, t: Option<&CandidateMarking>, stdout: &mut dyn Write) -> Result<()> {
    write_to(&output.out, &format_graph(g)?, stdout)?;
    if let (Some(path), Some(t)) = (&output.marking_out, t) {
        write_to(path, &format_marking(g, t), stdout)?;
    }
    Ok(())
}

impl Cli {
    fn config(&self, g: &WeightedGraph, simultaneous: bool) -> EngineConfig {
        let mut cfg = EngineConfig::for_graph(g);
        cfg.seed = self.seed;
        if simultaneous {
            cfg.wakeup = Wakeup::Simultaneous;
        }
        if let Some(b) = self.bits {
            cfg.bits = b;
        }
        if let Some(m) = self.max_rounds {
            cfg.max_rounds = m;
        }
        cfg
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Gen(gen) => generate(cli, gen, stdout),
        Command::Verify(args) => verify(cli, args, stdout),
        Command::Bench(args) => bench(cli, args, stdout, stderr),
        Command::Lowerbound(lb) => lowerbound(cli, lb, stdout),
    }
}

fn generate(cli: &Cli, gen: &Gen, stdout: &mut dyn Write) -> Result<()> {
    let mut r = rng(cli.seed);
    match gen {
        Gen::Random { n, avg_deg, wmax, candidate: kind, output } => {
            if *n == 0 || !avg_deg.is_finite() || *avg_deg < 0.0 {
                bail!("need n ≥ 1 and a nonnegative average degree");
            }
            let wmax = wmax.unwrap_or(u64::from(*n) * u64::from(*n));
            let g = random_connected(*n, edges_for_degree(*n, *avg_deg), wmax, &mut r)?;
            let t = candidate(&g, *kind, &mut r);
            emit(output, &g, Some(&t), stdout)
        }
        Gen::F2m { m, output } => emit(output, &build_f2m(*m)?.graph, None, stdout),
        Gen::J2m { m, gamma, xr, output } => {
            let len = (*m as usize).pow(2);
            let gamma = match gamma {
                Some(s) => parse_bits(s, len)?,
                None => (0..len).map(|_| r.gen_bool(0.5)).collect(),
            };
            match xr {
                Some(xr) => {
                    let inst = EqInstance::new(*m, gamma, parse_bits(xr, len)?)?;
                    let (g, t) = eq_to_mst_instance(&inst)?;
                    emit(output, &g, Some(&t), stdout)
                }
                None => emit(output, &build_j2m(*m, &gamma)?.graph, None, stdout),
            }
        }
        Gen::G2 { graph, marking, output } => {
            let (g, t) = load(graph, marking)?;
            let g2 = build_g2(&g, &t)?;
            emit(output, &g2.graph, Some(&g2.marking), stdout)
        }
        Gen::Gx { graph, marking, edge, output } => {
            let (g, t) = load(graph, marking)?;
            let e1 = match edge {
                Some(uv) => g
                    .edge_between(uv[0].into(), uv[1].into())
                    .ok_or_else(|| anyhow!("no edge {} {}", uv[0], uv[1]))?,
                None => (0..g.m()).find(|&e| !t.contains(e)).ok_or_else(|| anyhow!("every edge is marked"))?,
            };
            let g2 = build_g2(&g, &t)?;
            let (gx, tx) = build_gx(&g2, e1, e1 + g2.m0)?;
            emit(output, &gx, Some(&tx), stdout)
        }
    }
}

fn verify(cli: &Cli, args: &VerifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let (g, t) = load(&args.graph, &args.marking)?;
    let mut cfg = cli.config(&g, args.simultaneous);
    cfg.record_trace = args.trace.is_some();
    let bits = cfg.bits;
    let out = verify_mst_distributed(&g, &t, cfg)?;
    let oracle = is_mst(&g, &t)?;
    if let Some(path) = &args.trace {
        write_to(path, &format_trace(&out.trace), stdout)?;
    }
    let report = VerifyJson::new(&out, bits, oracle);
    match cli.format {
        Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => writeln!(
            stdout,
            "verdict,rejected_at,rounds,messages,oracle_verdict\n{},{},{},{},{}",
            report.verdict,
            report.rejected_at.unwrap_or(""),
            report.rounds,
            report.messages,
            report.oracle_verdict
        )?,
    }
    if out.verdict != oracle {
        return Err(Mismatch(format!("protocol says {} but the oracle says {oracle}", out.verdict)).into());
    }
    Ok(())
}

fn bench(cli: &Cli, args: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let sweep = Sweep {
        sizes: args.sizes.clone(),
        seeds: (cli.seed..cli.seed + args.runs).collect(),
        avg_deg: args.avg_deg,
        wmax: args.wmax,
        candidate: args.candidate,
        simultaneous: args.simultaneous,
        bits: cli.bits,
        max_rounds: cli.max_rounds,
    };
    let runs = run_sweep(&sweep)?;
    let rows: Vec<BenchRow> = runs.iter().map(|r| r.row.clone()).collect();
    let summary = summarize(&rows);
    let mut csv = String::from(BenchRow::HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    let phases: Vec<MetricsJson> = runs.iter().map(|r| MetricsJson::from(&r.outcome.metrics)).collect();
    let doc = serde_json::json!({ "rows": rows, "phases": phases, "summary": summary });
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    match (&args.out, cli.format) {
        (Some(path), _) => fs::write(path, &csv)?,
        (None, Format::Csv) => stdout.write_all(csv.as_bytes())?,
        (None, Format::Json) => writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?,
    }
    for s in &summary {
        writeln!(
            stderr,
            "n={:<6} runs={:<3} rounds/((√n+D)(1+log n)²)={:.4} messages/(m(1+log n)²)={:.4} rounds/(√n+D)={:.2}",
            s.n, s.runs, s.mean_round_ratio, s.mean_message_ratio, s.mean_rounds_per_sqrt_n_plus_d
        )?;
    }
    if let (Some(first), Some(last)) = (summary.first(), summary.last()) {
        writeln!(
            stderr,
            "growth over the sweep: rounds ratio ×{:.3}, messages ratio ×{:.3}",
            last.mean_round_ratio / first.mean_round_ratio,
            last.mean_message_ratio / first.mean_message_ratio
        )?;
    }
    let bad: Vec<u64> = runs.iter().filter(|r| !r.agrees()).map(|r| r.row.seed).collect();
    if !bad.is_empty() {
        return Err(Mismatch(format!("protocol and oracle disagree on seeds {bad:?}")).into());
    }
    Ok(())
}

fn lowerbound(cli: &Cli, lb: &Lowerbound, stdout: &mut dyn Write) -> Result<()> {
    match lb {
        Lowerbound::Reduction { m, xs, xr } => {
            let len = (*m as usize).pow(2);
            let pairs: Vec<(Vec<bool>, Vec<bool>)> = match (xs, xr) {
                (Some(a), Some(b)) => vec![(parse_bits(a, len)?, parse_bits(b, len)?)],
                _ if len <= 4 => {
                    let vecs: Vec<Vec<bool>> = (0..1u32 << len).map(|x| (0..len).map(|b| x >> b & 1 == 1).collect()).collect();
                    vecs.iter().flat_map(|a| vecs.iter().map(move |b| (a.clone(), b.clone()))).collect()
                }
                _ => bail!("exhaustive runs need m ≤ 2; pass --xs and --xr"),
            };
            let mut rows = Vec::new();
            let mut mismatches = 0;
            for (a, b) in pairs {
                let equal = a == b;
                let (g, t) = eq_to_mst_instance(&EqInstance::new(*m, a, b)?)?;
                let oracle = is_mst(&g, &t)?;
                let out = verify_mst_distributed(&g, &t, cli.config(&g, false))?;
                if oracle != equal || out.verdict != oracle {
                    mismatches += 1;
                }
                rows.push(serde_json::json!({
                    "equal": equal, "oracle_verdict": oracle, "verdict": out.verdict,
                    "rounds": out.metrics.rounds, "messages": out.metrics.messages,
                }));
            }
            let doc = serde_json::json!({ "m": m, "instances": rows.len(), "mismatches": mismatches, "runs": rows });
            writeln!(stdout, "{}", serde_json::to_string_pretty(&doc)?)?;
            if mismatches > 0 {
                return Err(Mismatch(format!("{mismatches} instances disagree")).into());
            }
            Ok(())
        }
        Lowerbound::Crosswire { graph, marking, n, protocol } => {
            let (g, t) = match (graph, marking) {
                (Some(gp), Some(mp)) => load(gp, mp)?,
                _ => {
                    let mut r = rng(cli.seed);
                    let g = random_connected(*n, edges_for_degree(*n, 3.0), u64::from(*n) * u64::from(*n), &mut r)?;
                    let t = candidate(&g, Candidate::Mst, &mut r);
                    (g, t)
                }
            };
            let verifier: &dyn StVerifier = match protocol {
                Protocol::Frugal => &FrugalVerifier,
                Protocol::Full => &FullVerifier,
            };
            let report = cross_wire_experiment(&g, &t, verifier)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&CrossWireJson::from(&report))?)?;
            Ok(())
        }
    }
}
