//! End-to-end tests of the `graphsim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphsim"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn path4() -> String {
    repo().join("data/path4.txt").display().to_string()
}

fn graphsim(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and data row split into fields.
fn row(o: &Output) -> (Vec<String>, Vec<String>) {
    let text = stdout(o);
    let mut lines = text.lines();
    let split = |l: &str| l.split(',').map(String::from).collect::<Vec<_>>();
    (split(lines.next().unwrap()), split(lines.next().unwrap()))
}

fn field<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    &row[header.iter().position(|h| h == name).unwrap()]
}

#[test]
fn bfs_on_bundled_path_matches_oracle_for_every_design() {
    let dir = tempfile::tempdir().unwrap();
    for accel in ["AccuGraph", "ForeGraph", "HitGraph", "ThunderGP"] {
        let values = dir.path().join(format!("{accel}.csv"));
        let o = graphsim(&[
            "simulate",
            "--accel",
            accel,
            "--problem",
            "bfs",
            "--graph",
            &path4(),
            "--root",
            "0",
            "--values",
            values.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&values).unwrap();
        assert_eq!(text, "vertex,value\n0,0\n1,1\n2,2\n3,3\n", "{accel}");
        let (h, r) = row(&o);
        assert_eq!(field(&h, &r, "accelerator"), accel);
        assert_eq!(field(&h, &r, "edges"), "3");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let p = path4();
    let cases: Vec<Vec<&str>> = vec![
        vec![
            "simulate",
            "--accel",
            "AccuGraph",
            "--problem",
            "sssp",
            "--graph",
            &p,
        ],
        vec![
            "simulate",
            "--accel",
            "Nope",
            "--problem",
            "bfs",
            "--graph",
            &p,
        ],
        vec![
            "simulate",
            "--accel",
            "AccuGraph",
            "--problem",
            "bfs",
            "--graph",
            &p,
            "--channels",
            "2",
        ],
        vec![
            "simulate",
            "--accel",
            "HitGraph",
            "--problem",
            "bfs",
            "--graph",
            &p,
            "--opt",
            "edge_shuffle",
        ],
        vec![
            "simulate",
            "--accel",
            "HitGraph",
            "--problem",
            "bfs",
            "--graph",
            &p,
            "--root",
            "99",
        ],
        vec![
            "simulate",
            "--accel",
            "HitGraph",
            "--problem",
            "bfs",
            "--graph",
            &p,
            "--dram",
            "sdram",
        ],
        vec![
            "simulate",
            "--accel",
            "HitGraph",
            "--problem",
            "bfs",
            "--graph",
            "rmat:3",
        ],
        vec!["simulate", "--bogus"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = graphsim(&args);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn run_errors_exit_with_one() {
    let o = graphsim(&[
        "simulate",
        "--accel",
        "HitGraph",
        "--problem",
        "bfs",
        "--graph",
        "/no/such/graph.txt",
    ]);
    assert_eq!(code(&o), 1);
    let o = graphsim(&["replay", "/no/such/trace.csv"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn optimizations_change_only_their_counters() {
    let run = |opt: &str| {
        let o = graphsim(&[
            "simulate",
            "--accel",
            "HitGraph",
            "--problem",
            "bfs",
            "--graph",
            "rmat:10:8:3",
            "--opt",
            opt,
            "--channels",
            "2",
        ]);
        assert_eq!(code(&o), 0);
        row(&o)
    };
    let (h, all) = run("all");
    let (_, none) = run("none");
    for name in [
        "accelerator",
        "problem",
        "graph",
        "dram",
        "channels",
        "vertices",
        "edges",
        "iterations",
    ] {
        assert_eq!(field(&h, &all, name), field(&h, &none, name), "{name}");
    }
    assert_ne!(
        field(&h, &all, "optimizations"),
        field(&h, &none, "optimizations")
    );
    let updates = |r: &[String]| field(&h, r, "updates_written").parse::<u64>().unwrap();
    assert!(updates(&all) < updates(&none));
}

#[test]
fn trace_replay_reproduces_run_counters() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let o = graphsim(&[
        "simulate",
        "--accel",
        "ThunderGP",
        "--problem",
        "pr",
        "--graph",
        "rmat:9:8",
        "--channels",
        "2",
        "--dram",
        "hbm",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (h, r) = row(&o);
    let o = graphsim(&["replay", trace.to_str().unwrap(), "--dram", "hbm"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let total: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("total,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(total[1], field(&h, &r, "requests"));
    assert_eq!(total[4], field(&h, &r, "row_hits"));
    assert_eq!(total[5], field(&h, &r, "row_misses"));
    assert_eq!(total[6], field(&h, &r, "row_conflicts"));
}

fn write_sweep(dir: &Path) -> PathBuf {
    let cfg = dir.join("sweep.toml");
    let text = format!(
        "out = \"out.csv\"\nsummary = \"summary.txt\"\n\
         graphs = [\"rmat:8:8:2\", {{ path = \"{}\", root = 0 }}]\n\
         problems = [\"BFS\", \"SpMV\"]\n\
         drams = [\"ddr4\", \"hbm\"]\n\
         channels = [1, 2]\n\
         optimizations = [\"all\", \"none\"]\n",
        path4()
    );
    std::fs::write(&cfg, text).unwrap();
    cfg
}

fn sweep(cfg: &Path, workers: &str) -> Output {
    bin()
        .args(["sweep", cfg.to_str().unwrap()])
        .env("GRAPHSIM_WORKERS", workers)
        .output()
        .unwrap()
}

#[test]
fn sweep_is_resumable_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let cfg = write_sweep(a.path());
    let o = sweep(&cfg, "3");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = a.path().join("out.csv");
    let full = std::fs::read_to_string(&out).unwrap();
    // Per graph and DRAM: AccuGraph and ForeGraph run BFS on one channel
    // with two option sets; HitGraph and ThunderGP add SpMV and two channels.
    let rows = full.lines().count() - 1;
    assert_eq!(rows, 2 * 2 * (2 + 2 + 8 + 8));
    assert!(a.path().join("summary.txt").exists());

    let o = sweep(&cfg, "2");
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("0 runs written"));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), full);

    let kept: Vec<&str> = full.lines().take(10).collect();
    std::fs::write(&out, kept.join("\n") + "\n").unwrap();
    let o = sweep(&cfg, "4");
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), full);

    let b = tempfile::tempdir().unwrap();
    let cfg_b = write_sweep(b.path());
    assert_eq!(code(&sweep(&cfg_b, "1")), 0);
    assert_eq!(
        std::fs::read_to_string(b.path().join("out.csv")).unwrap(),
        full
    );

    let o = graphsim(&["summary", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("rmat-8-8-s2"));
}

#[test]
fn malformed_sweeps_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "out = [1]\n").unwrap();
    assert_eq!(code(&sweep(&cfg, "1")), 2);
    let cfg = write_sweep(dir.path());
    assert_eq!(code(&sweep(&cfg, "zero")), 2);
}
