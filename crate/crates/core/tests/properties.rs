//! Randomized invariants over graphs, layouts, streams and the DRAM model.

mod common;

use common::{config, simulate};
use graphsim::accel::{Accelerator, Opt, Optimizations};
use graphsim::algorithms::{reference_run, Scheme};
use graphsim::dram::{replay, run_arrivals, Dram, DramConfig, DramRequest, Kind};
use graphsim::flow::{drain, LineMerge, MemRequest, PushQueue};
use graphsim::graph::{Edge, Graph};
use graphsim::partition::{stride_map, unmap_values, RegionKind};
use graphsim::{Problem, ProblemSpec};
use proptest::prelude::*;

fn arb_graph(max_n: u32, max_m: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, any::<bool>()).prop_flat_map(move |(n, directed)| {
        prop::collection::vec((0..n, 0..n), 0..=max_m).prop_map(move |pairs| {
            let edges = pairs.into_iter().map(|(s, d)| Edge::new(s, d)).collect();
            Graph::from_edges("random", n as usize, edges, None, directed).unwrap()
        })
    })
}

fn arb_accel() -> impl Strategy<Value = Accelerator> {
    prop::sample::select(Accelerator::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accelerators_match_reference(
        g in arb_graph(48, 160),
        accel in arb_accel(),
        problem in prop::sample::select(vec![Problem::Bfs, Problem::Wcc, Problem::Pr, Problem::Sssp]),
        channels in 1usize..=3,
        interval in prop::option::of(1u32..20),
        root_pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(accel.supports(problem));
        let g = if problem.is_weighted() { g.with_random_weights(3) } else { g };
        let root = root_pick.index(g.n()) as u32;
        let mut cfg = config(accel, problem);
        if accel.multi_channel() {
            cfg = cfg.with_channels(channels);
        }
        if let Some(i) = interval {
            cfg = cfg.with_interval(i);
        }
        let r = simulate(&g, root, &cfg);
        let (expect, _) = reference_run(&ProblemSpec::new(problem), &g, root, Scheme::TwoPhase).unwrap();
        prop_assert!(r.final_values.matches(&expect, problem), "{:?} vs {:?}", r.final_values, expect);
    }

    #[test]
    fn skipping_keeps_values_and_never_adds_requests(
        g in arb_graph(48, 160),
        accel in prop::sample::select(vec![Accelerator::AccuGraph, Accelerator::ForeGraph, Accelerator::HitGraph]),
        problem in prop::sample::select(vec![Problem::Bfs, Problem::Wcc]),
        interval in 1u32..16,
    ) {
        let opt = match accel {
            Accelerator::ForeGraph => Opt::ShardSkip,
            _ => Opt::PartitionSkip,
        };
        let base = Optimizations::all_for(accel).without(opt);
        let cfg = config(accel, problem).with_interval(interval).with_optimizations(base.clone());
        let off = simulate(&g, 0, &cfg);
        let on = simulate(&g, 0, &cfg.with_optimizations(base.with(opt)));
        prop_assert_eq!(&on.final_values, &off.final_values);
        prop_assert!(on.total_requests() <= off.total_requests());
    }

    #[test]
    fn dram_classifies_every_request(
        reqs in prop::collection::vec((0u64..500, 0u64..(1 << 22), any::<bool>()), 1..300),
        preset in prop::sample::select(vec!["ddr3-1600", "ddr4-2400", "hbm"]),
    ) {
        let cfg = DramConfig::preset(preset).unwrap();
        let mut dram = Dram::new(cfg);
        let arrivals: Vec<_> = reqs
            .iter()
            .enumerate()
            .map(|(i, &(t, line, w))| {
                let kind = if w { Kind::Write } else { Kind::Read };
                (t, DramRequest { id: i as u64, kind, channel: 0, address: line * 64 })
            })
            .collect();
        let done = run_arrivals(&mut dram, &arrivals).unwrap();
        let mut ids: Vec<u64> = done.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..reqs.len() as u64).collect::<Vec<_>>());
        for c in &done {
            prop_assert!(c.cycle > arrivals[c.id as usize].0);
        }
        let s = dram.stats();
        prop_assert_eq!(s.row_hits + s.row_misses + s.row_conflicts, s.requests());
        prop_assert_eq!(s.requests(), reqs.len() as u64);
    }

    #[test]
    fn line_merge_conserves_records(
        records in prop::collection::vec((0u64..4096, prop::sample::select(vec![4u32, 8, 12])), 0..200),
    ) {
        let q = PushQueue::new();
        let mut payload = 0u64;
        for (i, &(slot, bytes)) in records.iter().enumerate() {
            let addr = slot * bytes as u64;
            q.push(MemRequest::record(Kind::Read, 0, addr, bytes, RegionKind::Edges, 0, i as u64));
            payload += bytes as u64;
        }
        q.close();
        let out = drain(LineMerge::new(q));
        prop_assert_eq!(out.iter().map(|r| r.payload as u64).sum::<u64>(), payload);
        prop_assert_eq!(out.iter().map(|r| r.count as u64).sum::<u64>(), records.len() as u64);
        prop_assert!(out.iter().all(|r| r.addr % 64 == 0 && r.bytes == 64));
    }

    #[test]
    fn stride_map_round_trips(g in arb_graph(200, 50), stride in 1u32..40) {
        let (mapped, perm) = stride_map(&g, stride).unwrap();
        let mut seen = perm.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..g.n() as u32).collect::<Vec<_>>());
        let values: Vec<f64> = (0..g.n()).map(|v| v as f64).collect();
        let forward: Vec<f64> = {
            let mut f = vec![0.0; g.n()];
            for (old, &new) in perm.iter().enumerate() {
                f[new as usize] = values[old];
            }
            f
        };
        prop_assert_eq!(unmap_values(&forward, &perm), values);
        prop_assert_eq!(mapped.m(), g.m());
        for (a, b) in g.edges().iter().zip(mapped.edges()) {
            prop_assert_eq!((perm[a.src as usize], perm[a.dst as usize]), (b.src, b.dst));
        }
    }

    #[test]
    fn csr_indexes_every_edge_once(g in arb_graph(64, 200)) {
        for (csr, key_is_src) in [(g.out_csr(), true), (g.in_csr(), false)] {
            prop_assert_eq!(csr.offsets.len(), g.n() + 1);
            let mut ids = csr.edge_ids.clone();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..g.m() as u32).collect::<Vec<_>>());
            for v in 0..g.n() as u32 {
                for slot in csr.range(v) {
                    let e = g.edges()[csr.edge_ids[slot] as usize];
                    let (key, nb) = if key_is_src { (e.src, e.dst) } else { (e.dst, e.src) };
                    prop_assert_eq!((key, nb), (v, csr.neighbors[slot]));
                }
            }
        }
    }
}

#[test]
fn trace_replay_reproduces_counters() {
    let g = common::rmat(10, 8);
    let root = common::hub(&g);
    for accel in Accelerator::ALL {
        for (dram, channels) in [(DramConfig::ddr4(), 1), (DramConfig::hbm(), 2)] {
            let channels = if accel.multi_channel() { channels } else { 1 };
            let mut cfg = config(accel, Problem::Bfs).with_channels(channels);
            cfg.dram = dram.clone();
            cfg.trace = true;
            let r = simulate(&g, root, &cfg);
            let trace = r.trace.as_ref().expect("trace requested");
            assert_eq!(trace.len() as u64, r.total_requests());
            let mut buf = Vec::new();
            graphsim::dram::write_trace(trace, &mut buf).unwrap();
            let parsed = graphsim::dram::read_trace(buf.as_slice(), "memory").unwrap();
            assert_eq!(&parsed, trace);
            let out = replay(&parsed, dram.with_channels(channels)).unwrap();
            assert_eq!(out.channel_stats, r.dram_stats, "{accel}");
            assert_eq!(out.last_completion, r.dram_cycles, "{accel}");
        }
    }
}

#[test]
fn unsupported_combinations_are_rejected() {
    let g = common::path(4);
    let err = graphsim::accel::run(&g, 0, &config(Accelerator::AccuGraph, Problem::Sssp));
    assert!(err.is_err());
    let err = graphsim::accel::run(
        &g,
        0,
        &config(Accelerator::AccuGraph, Problem::Bfs).with_channels(2),
    );
    assert!(err.is_err());
    let err = graphsim::accel::run(&g, 9, &config(Accelerator::HitGraph, Problem::Bfs));
    assert!(err.is_err());
}
