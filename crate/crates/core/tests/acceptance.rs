//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion before asserting.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::{
    close, config, corpus, dense_pass, in_star, path, rmat, simulate, small_corpus, Case,
};
use graphsim::accel::{Accelerator, Opt, Optimizations, RunResult};
use graphsim::algorithms::{reference_run, Scheme};
use graphsim::dram::{run_arrivals, Dram, DramConfig, DramRequest, Kind};
use graphsim::graph::{default_root, load_edge_list, short_name, Edge, Graph};
use graphsim::metrics::{compute_metrics, write_csv};
use graphsim::partition::{interval_shard, shuffle_edges, stride_map, RegionKind};
use graphsim::{Problem, ProblemSpec};

const WEIGHT_SEED: u64 = 0x5eed;

fn verdict(criterion: u32, title: &str, ok: bool, detail: &str) {
    let mark = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion} [{mark}] {title}: {detail}");
}

fn finish(criterion: u32, title: &str, failures: &[String], detail: &str) {
    verdict(criterion, title, failures.is_empty(), detail);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

fn weighted(g: &Graph) -> Graph {
    g.clone().with_random_weights(WEIGHT_SEED)
}

#[test]
fn criterion_1_oracle_correctness() {
    let start = Instant::now();
    let cases = corpus();
    let mut failures = Vec::new();
    let mut exact_graphs = 0;
    let mut dense_checks = 0;
    for Case { graph, root } in &cases {
        let gw = weighted(graph);
        let mut graph_ok = true;
        for accel in Accelerator::ALL {
            let channels: &[usize] = if accel.multi_channel() { &[1, 4] } else { &[1] };
            for &c in channels {
                for p in [Problem::Bfs, Problem::Wcc, Problem::Sssp] {
                    if !accel.supports(p) {
                        continue;
                    }
                    let g = if p.is_weighted() { &gw } else { graph };
                    let r = simulate(g, *root, &config(accel, p).with_channels(c));
                    let (expect, _) =
                        reference_run(&ProblemSpec::new(p), g, *root, Scheme::TwoPhase).unwrap();
                    if r.final_values != expect {
                        graph_ok = false;
                        failures.push(format!("{accel} {p} x{c} differs on {}", graph.name));
                    }
                }
                if graph.n() > 1024 {
                    continue;
                }
                for p in [Problem::Pr, Problem::Spmv] {
                    if !accel.supports(p) {
                        continue;
                    }
                    let g = if p.is_weighted() { &gw } else { graph };
                    let spec = ProblemSpec::new(p);
                    let r = simulate(g, *root, &config(accel, p).with_channels(c));
                    dense_checks += 1;
                    if !close(&r.final_values.0, &dense_pass(g, p, spec.damping), 1e-6) {
                        failures.push(format!("{accel} {p} x{c} off on {}", graph.name));
                    }
                }
            }
        }
        exact_graphs += usize::from(graph_ok);
    }
    let secs = start.elapsed().as_secs_f64();
    if exact_graphs < 12 {
        failures.push(format!("only {exact_graphs} graphs matched exactly"));
    }
    if secs >= 60.0 {
        failures.push(format!("took {secs:.1} s"));
    }
    let detail = format!(
        "{exact_graphs}/{} graphs exact, {dense_checks} dense checks, {secs:.1} s",
        cases.len()
    );
    finish(1, "values equal the oracles", &failures, &detail);
}

#[test]
fn criterion_2_immediate_updates_need_fewer_iterations() {
    let mut failures = Vec::new();
    let mut compared = 0;
    for Case { graph, root } in &corpus() {
        for p in [Problem::Bfs, Problem::Wcc] {
            let iters: BTreeMap<Accelerator, u32> = Accelerator::ALL
                .into_iter()
                .map(|a| (a, simulate(graph, *root, &config(a, p)).iterations))
                .collect();
            for (&imm, &i) in iters.iter().filter(|(a, _)| a.is_immediate()) {
                for (&two, &t) in iters.iter().filter(|(a, _)| !a.is_immediate()) {
                    compared += 1;
                    if i > t {
                        failures.push(format!("{p} on {}: {imm} {i} > {two} {t}", graph.name));
                    }
                }
            }
        }
    }
    let g = path(64);
    let accu = simulate(&g, 0, &config(Accelerator::AccuGraph, Problem::Bfs)).iterations;
    let hit = simulate(&g, 0, &config(Accelerator::HitGraph, Problem::Bfs)).iterations;
    if (accu, hit) != (2, 64) {
        failures.push(format!("path-64 BFS: immediate {accu}, two-phase {hit}"));
    }
    let detail = format!("{compared} comparisons, path-64 immediate {accu} vs two-phase {hit}");
    finish(2, "immediate <= two-phase iterations", &failures, &detail);
}

fn edge_read_bytes(r: &RunResult) -> u64 {
    r.accounting.payload_bytes(RegionKind::Edges, Kind::Read)
}

#[test]
fn criterion_3_edge_byte_accounting() {
    let mut failures = Vec::new();
    let mut runs = 0;
    let interval = 16;
    let fore_opts = [
        Optimizations::none(),
        Optimizations::only(&[Opt::EdgeShuffle]),
        Optimizations::only(&[Opt::EdgeShuffle, Opt::StrideMap]),
    ];
    let mut graphs: Vec<Case> = small_corpus();
    let g = rmat(10, 8);
    graphs.push(Case {
        root: common::hub(&g),
        graph: g,
    });
    for Case { graph, root } in &graphs {
        for opts in &fore_opts {
            let cfg = config(Accelerator::ForeGraph, Problem::Bfs)
                .with_interval(interval)
                .with_optimizations(opts.clone());
            let k = graph.n().div_ceil(interval as usize) as u32;
            let mapped = if opts.contains(Opt::StrideMap) {
                stride_map(graph, k).unwrap().0
            } else {
                graph.clone()
            };
            let mut layout = interval_shard(&mapped, interval).unwrap();
            if opts.contains(Opt::EdgeShuffle) {
                layout = shuffle_edges(&layout, cfg.pes);
            }
            let stored = layout.stored_records();
            let r = simulate(graph, *root, &cfg);
            runs += 1;
            let expect = 4 * stored * r.iterations as u64;
            if edge_read_bytes(&r) != expect
                || r.edges_read_per_iteration.iter().any(|&e| e != stored)
            {
                failures.push(format!(
                    "ForeGraph {opts} on {}: {} bytes, expected {expect}",
                    graph.name,
                    edge_read_bytes(&r)
                ));
            }
        }
        let hit_opts = Optimizations::all_for(Accelerator::HitGraph).without(Opt::PartitionSkip);
        for (p, record) in [(Problem::Bfs, 8), (Problem::Pr, 8), (Problem::Sssp, 12)] {
            for c in [1, 2] {
                let cfg = config(Accelerator::HitGraph, p)
                    .with_channels(c)
                    .with_optimizations(hit_opts.clone());
                let r = simulate(graph, *root, &cfg);
                runs += 1;
                let expect = record * graph.m() as u64 * r.iterations as u64;
                if edge_read_bytes(&r) != expect {
                    failures.push(format!(
                        "HitGraph {p} x{c} on {}: {} bytes, expected {expect}",
                        graph.name,
                        edge_read_bytes(&r)
                    ));
                }
            }
        }
    }
    finish(
        3,
        "edge-region bytes exact",
        &failures,
        &format!("{runs} runs"),
    );
}

fn read(id: u64, address: u64) -> DramRequest {
    DramRequest {
        id,
        kind: Kind::Read,
        channel: 0,
        address,
    }
}

fn drive(cfg: DramConfig, addrs: impl Iterator<Item = u64>) -> Dram {
    let mut dram = Dram::new(cfg);
    let reqs: Vec<_> = addrs
        .enumerate()
        .map(|(i, a)| (0, read(i as u64, a)))
        .collect();
    run_arrivals(&mut dram, &reqs).unwrap();
    dram
}

#[test]
fn criterion_4_dram_model() {
    let mut failures = Vec::new();
    let mut runs = 0;
    let mut graphs = small_corpus();
    let g = rmat(10, 8);
    graphs.push(Case {
        root: common::hub(&g),
        graph: g,
    });
    for Case { graph, root } in &graphs {
        for accel in Accelerator::ALL {
            for p in Problem::ALL.into_iter().filter(|&p| accel.supports(p)) {
                let channels: &[usize] = if accel.multi_channel() { &[1, 2] } else { &[1] };
                for &c in channels {
                    let r = simulate(graph, *root, &config(accel, p).with_channels(c));
                    runs += 1;
                    let total = r.total_dram_stats();
                    let per_channel = r.dram_stats.iter().all(|s| s.classified() == s.requests());
                    if !per_channel || total.requests() != r.total_requests() {
                        failures.push(format!("{accel} {p} x{c} on {}", graph.name));
                    }
                }
            }
        }
    }

    let ddr4 = DramConfig::ddr4();
    let seq = drive(ddr4.clone(), (0..100_000u64).map(|i| i * 64));
    let util = seq.stats().utilization(&ddr4, 1, seq.last_completion());
    if util < 0.9 {
        failures.push(format!("sequential utilization {util:.3}"));
    }
    let conflicts = |cfg: DramConfig| {
        drive(cfg, (0..4_000u64).map(|i| i * 4096))
            .stats()
            .row_conflicts
    };
    let (hbm, ddr) = (conflicts(DramConfig::hbm()), conflicts(ddr4));
    if hbm <= ddr {
        failures.push(format!("4 KiB stride conflicts: HBM {hbm} vs DDR4 {ddr}"));
    }
    let detail = format!(
        "{runs} runs classified, sequential utilization {util:.3}, stride conflicts HBM {hbm} > DDR4 {ddr}"
    );
    finish(4, "DRAM model", &failures, &detail);
}

/// Optimizations whose effect is only to skip work.
fn skip_opts(accel: Accelerator) -> &'static [Opt] {
    match accel {
        Accelerator::AccuGraph => &[Opt::PartitionSkip],
        Accelerator::ForeGraph => &[Opt::ShardSkip],
        Accelerator::HitGraph => &[Opt::PartitionSkip, Opt::UpdateFilter],
        Accelerator::ThunderGP => &[],
    }
}

#[test]
fn criterion_5_optimizations() {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for Case { graph, root } in &corpus() {
        for accel in Accelerator::ALL {
            for &opt in skip_opts(accel) {
                for p in [Problem::Bfs, Problem::Wcc, Problem::Pr] {
                    let base = Optimizations::all_for(accel).without(opt);
                    let cfg = config(accel, p).with_optimizations(base.clone());
                    let off = simulate(graph, *root, &cfg);
                    let on = simulate(graph, *root, &cfg.with_optimizations(base.with(opt)));
                    pairs += 1;
                    if on.final_values != off.final_values
                        || on.total_requests() > off.total_requests()
                    {
                        failures.push(format!(
                            "{accel} {} {p} on {}: {} vs {} requests",
                            opt.name(),
                            graph.name,
                            on.total_requests(),
                            off.total_requests()
                        ));
                    }
                }
            }
        }
    }

    let star = in_star(64);
    let mut combined = Vec::new();
    for c in [1, 2, 4] {
        let cfg = config(Accelerator::HitGraph, Problem::Pr).with_channels(c);
        let plain = simulate(
            &star,
            0,
            &cfg.clone().with_optimizations(Optimizations::none()),
        );
        let comb = simulate(
            &star,
            0,
            &cfg.with_optimizations(Optimizations::only(&[Opt::UpdateCombine])),
        );
        combined.push(comb.updates_written);
        if plain.updates_written != 64 || comb.updates_written > c as u64 {
            failures.push(format!(
                "star x{c}: {} -> {} updates",
                plain.updates_written, comb.updates_written
            ));
        }
    }

    let mut pairs_skew: Vec<Edge> = (0..20)
        .flat_map(|u| (0..10).map(move |v| Edge::new(u, v)))
        .collect();
    pairs_skew.push(Edge::new(0, 40));
    let skew = Graph::from_edges("skew", 64, pairs_skew, None, true).unwrap();
    let fore = config(Accelerator::ForeGraph, Problem::Pr).with_interval(32);
    let plain = simulate(
        &skew,
        0,
        &fore.clone().with_optimizations(Optimizations::none()),
    );
    let shuffled = simulate(
        &skew,
        0,
        &fore.with_optimizations(Optimizations::only(&[Opt::EdgeShuffle])),
    );
    if shuffled.edges_read_total <= plain.edges_read_total {
        failures.push(format!(
            "edge shuffle read {} edges vs {}",
            shuffled.edges_read_total, plain.edges_read_total
        ));
    }
    let detail = format!(
        "{pairs} skip pairs, star updates 64 -> {combined:?} for 1/2/4 channels, shuffle edges {} -> {}",
        plain.edges_read_total, shuffled.edges_read_total
    );
    finish(5, "optimization effects", &failures, &detail);
}

#[test]
fn criterion_6_channel_scaling() {
    let mut failures = Vec::new();
    let g = rmat(14, 16);
    let root = common::hub(&g);
    let elapsed: Vec<f64> = [1, 2, 4]
        .into_iter()
        .map(|c| {
            let cfg = config(Accelerator::HitGraph, Problem::Bfs).with_channels(c);
            simulate(&g, root, &cfg).elapsed_ns
        })
        .collect();
    if !elapsed.windows(2).all(|w| w[1] < w[0]) {
        failures.push(format!("HitGraph BFS elapsed {elapsed:?}"));
    }
    let n = g.n() as u64;
    let m = g.m() as u64;
    for c in [1u64, 2, 4] {
        let cfg = config(Accelerator::ThunderGP, Problem::Pr).with_channels(c as usize);
        let r = simulate(&g, root, &cfg);
        let expect = n * 4 + (m / c) * 8 + n * 4;
        if r.footprint.len() != c as usize || r.footprint.iter().any(|&f| f != expect) {
            failures.push(format!(
                "ThunderGP x{c} footprint {:?}, expected {expect}",
                r.footprint
            ));
        }
    }
    let detail = format!(
        "HitGraph BFS ns {:.0} > {:.0} > {:.0}",
        elapsed[0], elapsed[1], elapsed[2]
    );
    finish(6, "channel scaling", &failures, &detail);
}

/// Published runtimes in seconds, BFS/PR/WCC for AccuGraph, ForeGraph,
/// HitGraph and ThunderGP.
const PUBLISHED: [(&str, bool, [[f64; 3]; 4]); 4] = [
    (
        "sd",
        true,
        [
            [0.0017, 0.0005, 0.0009],
            [0.0159, 0.0009, 0.0046],
            [0.0081, 0.0009, 0.0077],
            [0.0087, 0.0009, 0.0078],
        ],
    ),
    (
        "db",
        false,
        [
            [0.0107, 0.0014, 0.0083],
            [0.0268, 0.0019, 0.0173],
            [0.0344, 0.0023, 0.0348],
            [0.0345, 0.0022, 0.0323],
        ],
    ),
    (
        "yt",
        false,
        [
            [0.0232, 0.0044, 0.0189],
            [0.0332, 0.0032, 0.0256],
            [0.0659, 0.0076, 0.0706],
            [0.0940, 0.0063, 0.0879],
        ],
    ),
    (
        "wt",
        true,
        [
            [0.0274, 0.0075, 0.0236],
            [0.0327, 0.0061, 0.0245],
            [0.0601, 0.0094, 0.0653],
            [0.0529, 0.0066, 0.0464],
        ],
    ),
];

fn data_dir() -> PathBuf {
    std::env::var_os("GRAPHSIM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn find_graph(dir: &Path, short: &str) -> Option<PathBuf> {
    let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|f| f.to_str())
                .and_then(short_name)
                .is_some_and(|s| s == short)
        })
        .collect();
    found.sort();
    found.into_iter().next()
}

fn load(path: &Path, directed: bool) -> Graph {
    let g = if path.extension().is_some_and(|e| e == "bin") {
        Graph::load_binary(path)
    } else {
        load_edge_list(path, false, directed)
    };
    g.unwrap_or_else(|e| panic!("loading {}: {e}", path.display()))
}

/// True when every strictly ordered published pair keeps its order.
fn same_order(published: &[f64; 4], simulated: &[f64; 4]) -> bool {
    (0..4).all(|a| (0..4).all(|b| published[a] >= published[b] || simulated[a] <= simulated[b]))
}

#[test]
fn criterion_7_published_runtime_ordering() {
    let dir = data_dir();
    let missing: Vec<&str> = PUBLISHED
        .iter()
        .filter(|(s, _, _)| find_graph(&dir, s).is_none())
        .map(|(s, _, _)| *s)
        .collect();
    if !missing.is_empty() {
        let detail = format!("BLOCKED, graphs {missing:?} not found in {}", dir.display());
        verdict(7, "runtime ordering on real graphs", false, &detail);
        panic!("{detail}");
    }
    let mut matched = 0;
    let mut cells = 0;
    let mut failures = Vec::new();
    for (short, directed, table) in &PUBLISHED {
        let g = load(&find_graph(&dir, short).unwrap(), *directed);
        let root = default_root(&g);
        for (col, p) in [Problem::Bfs, Problem::Pr, Problem::Wcc]
            .into_iter()
            .enumerate()
        {
            let mut sim = [0.0; 4];
            for (i, accel) in Accelerator::ALL.into_iter().enumerate() {
                sim[i] = simulate(&g, root, &config(accel, p)).elapsed_seconds();
            }
            let published = [table[0][col], table[1][col], table[2][col], table[3][col]];
            cells += 1;
            if same_order(&published, &sim) {
                matched += 1;
            } else {
                failures.push(format!("{short} {p}: simulated {sim:?}"));
            }
        }
    }
    let ok = matched * 5 >= cells * 4;
    let detail = format!("{matched}/{cells} cells ordered as published");
    verdict(7, "runtime ordering on real graphs", ok, &detail);
    assert!(ok, "{detail}\n{}", failures.join("\n"));
}

fn csv_bytes() -> Vec<u8> {
    let g = rmat(10, 8);
    let root = common::hub(&g);
    let mut rows = Vec::new();
    for accel in Accelerator::ALL {
        for p in Problem::ALL.into_iter().filter(|&p| accel.supports(p)) {
            for dram in [DramConfig::ddr4(), DramConfig::hbm()] {
                let mut cfg = config(accel, p);
                cfg.dram = dram;
                rows.push(compute_metrics(&simulate(&g, root, &cfg)).unwrap());
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs.csv");
    write_csv(&rows, &path).unwrap();
    std::fs::read(path).unwrap()
}

#[test]
fn criterion_8_deterministic_output() {
    let (a, b) = (csv_bytes(), csv_bytes());
    let ok = a == b && !a.is_empty();
    verdict(8, "byte-identical CSV", ok, &format!("{} bytes", a.len()));
    assert!(ok);
}
