use std::fs;
use std::path::Path;

use mstv::io::parse_graph;

fn mstv(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mstv").chain(args.iter().copied()).map(std::ffi::OsString::from);
    let code = mstv::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn generation_is_deterministic_per_seed() {
    let a = mstv(&["--seed", "7", "gen", "random", "--n", "30"]);
    let b = mstv(&["--seed", "7", "gen", "random", "--n", "30"]);
    let c = mstv(&["--seed", "8", "gen", "random", "--n", "30"]);
    assert_eq!(a.0, 0, "{}", a.2);
    assert_eq!(a.1, b.1);
    assert_ne!(a.1, c.1);
    let g = parse_graph(&a.1).unwrap();
    assert_eq!(g.n(), 30);
    assert!(g.is_connected());
}

#[test]
fn gadget_graphs() {
    let (code, out, _) = mstv(&["gen", "f2m", "--m", "2"]);
    assert_eq!(code, 0);
    let g = parse_graph(&out).unwrap();
    assert_eq!((g.n(), g.m()), (23, 30));

    let (code, out, _) = mstv(&["gen", "j2m", "--m", "2", "--gamma", "0101"]);
    assert_eq!(code, 0);
    let j = parse_graph(&out).unwrap();
    // star 0 spokes weigh 1 where gamma is 0 and 3 where it is 1
    let star0: Vec<u64> = (0..j.m())
        .map(|e| j.edge(e))
        .filter(|e| e.u.0 == 0 || e.v.0 == 0)
        .filter(|e| e.u.0.max(e.v.0) > 2)
        .map(|e| e.weight)
        .collect();
    assert_eq!(star0, [1, 3, 1, 3]);
}

#[test]
fn verify_accepts_mst_and_rejects_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let (g, t) = (path(dir.path(), "g.txt"), path(dir.path(), "t.txt"));
    for (kind, verdict) in [("mst", true), ("cycle", false)] {
        let (code, _, err) =
            mstv(&["--seed", "3", "gen", "random", "--n", "40", "--candidate", kind, "--out", &g, "--marking-out", &t]);
        assert_eq!(code, 0, "{err}");
        let trace = path(dir.path(), "trace.txt");
        let (code, out, err) = mstv(&["verify", "--graph", &g, "--marking", &t, "--trace", &trace]);
        assert_eq!(code, 0, "{err}");
        let report: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["verdict"], verdict);
        assert_eq!(report["oracle_verdict"], verdict);
        assert_eq!(report["rejected_at"].is_null(), verdict);
        let lines = fs::read_to_string(&trace).unwrap().lines().count();
        assert_eq!(report["messages"].as_u64().unwrap() as usize, lines);
    }
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (g, t) = (path(dir.path(), "g.txt"), path(dir.path(), "t.txt"));
    assert_eq!(mstv(&["gen", "random", "--n", "10", "--out", &g, "--marking-out", &t]).0, 0);
    fs::write(&t, "0 0\n").unwrap();
    let (code, _, err) = mstv(&["verify", "--graph", &g, "--marking", &t]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
    fs::write(&t, "zero one\n").unwrap();
    assert_eq!(mstv(&["verify", "--graph", &g, "--marking", &t]).0, 1);
    assert_eq!(mstv(&["verify", "--graph", &path(dir.path(), "missing"), "--marking", &t]).0, 1);
    assert_eq!(mstv(&["frobnicate"]).0, 1);
    assert_eq!(mstv(&["--help"]).0, 0);
}

#[test]
fn bench_writes_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (path(dir.path(), "b.csv"), path(dir.path(), "b.json"));
    let (code, _, err) = mstv(&["bench", "--sizes", "16,32", "--runs", "3", "--out", &csv, "--json", &json]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,"));
    assert_eq!(lines.count(), 6);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn lower_bound_commands() {
    let (code, out, err) = mstv(&["lowerbound", "reduction", "--m", "2", "--xs", "0110", "--xr", "0110"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("true"));
    let (code, out, err) = mstv(&["--seed", "4", "lowerbound", "crosswire", "--n", "14", "--protocol", "frugal"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["traces_similar"], true);
}
