//! Interval-shard grid processed by parallel PEs sharing one channel; each
//! PE owns a strided set of source intervals and writes back destination
//! intervals after every block.

use super::common::{is_active, IterationLog};
use super::{AccelConfig, Finish, ModelReport, Opt};
use crate::algorithms::{ProblemSpec, Reduction};
use crate::error::Result;
use crate::flow::{
    boxed, merged_reads, merged_writes, Accounting, BoxStream, Chain, MemRequest, Model, Poll,
    Priority, RequestStream, RoundRobin, StreamQueue, Trigger, Watch,
};
use crate::graph::Graph;
use crate::partition::{
    interval_shard, shuffle_edges, stride_map, unmap_values, RegionKind, ShardLayout,
    MAX_SHARD_INTERVAL, VALUE_BYTES,
};

const KIND_SHIFT: u32 = 28;
const INDEX_MASK: u32 = (1 << KIND_SHIFT) - 1;
const SRC_PREFETCH: u32 = 0;
const DST_PREFETCH: u32 = 1;
const EDGES: u32 = 2;
const WRITEBACK: u32 = 3;
const SHARD_RECORD_BYTES: u32 = 4;

fn source(kind: u32, index: usize) -> u32 {
    (kind << KIND_SHIFT) | index as u32
}

pub(crate) struct ForeGraph {
    spec: ProblemSpec,
    layout: ShardLayout,
    perm: Option<Vec<u32>>,
    pes: usize,
    n: usize,
    out_deg: Vec<u32>,
    values: Vec<f64>,
    old: Vec<f64>,
    acc: Vec<f64>,
    shard_skip: bool,
    dirty: Vec<bool>,
    pe_pending: Vec<u64>,
    remaining: Vec<u64>,
    log: IterationLog,
    changed: bool,
    stream: Option<BoxStream>,
    stream_done: bool,
    writebacks: Vec<StreamQueue>,
    chain_done: Vec<Trigger>,
    finished: bool,
}

impl ForeGraph {
    pub fn new(g: &Graph, root: u32, cfg: &AccelConfig) -> Result<ForeGraph> {
        let interval = cfg.base_interval().min(MAX_SHARD_INTERVAL);
        let k = g.n().div_ceil(interval as usize).max(1) as u32;
        let (mapped, perm, root) = if cfg.opt(Opt::StrideMap) {
            let (mg, perm) = stride_map(g, k)?;
            let r = perm[root as usize];
            (Some(mg), Some(perm), r)
        } else {
            (None, None, root)
        };
        let g = mapped.as_ref().unwrap_or(g);
        let mut layout = interval_shard(g, interval)?;
        if cfg.opt(Opt::EdgeShuffle) {
            layout = shuffle_edges(&layout, cfg.pes);
        }
        let spec = cfg.problem;
        let values = spec.init_values(g, root)?.0;
        let dirty = (0..layout.layout.k as u32)
            .map(|i| layout.interval(i).any(|v| is_active(values[v as usize])))
            .collect();
        let mut m = ForeGraph {
            spec,
            perm,
            pes: cfg.pes,
            n: g.n(),
            out_deg: g.out_degrees(),
            old: values.clone(),
            acc: vec![0.0; g.n()],
            values,
            shard_skip: cfg.opt(Opt::ShardSkip),
            dirty,
            pe_pending: vec![0; cfg.pes],
            remaining: vec![0; layout.blocks.len()],
            log: IterationLog::default(),
            changed: false,
            stream: None,
            stream_done: false,
            writebacks: Vec::new(),
            chain_done: Vec::new(),
            finished: false,
            layout,
        };
        m.begin_pass();
        Ok(m)
    }

    /// Computes one pass in interval order and builds the request streams
    /// that replay it on the PEs.
    fn begin_pass(&mut self) {
        self.log.begin();
        self.changed = false;
        self.old.clone_from(&self.values);
        let k = self.layout.layout.k;
        let mut processed = vec![false; k];
        for (i, done) in processed.iter_mut().enumerate() {
            if self.shard_skip && !self.dirty[i] {
                continue;
            }
            self.dirty[i] = false;
            *done = true;
            for b in self.layout.blocks_of(i as u32) {
                self.process_block(b);
            }
        }
        self.writebacks = (0..self.pes).map(|_| StreamQueue::new()).collect();
        self.chain_done = (0..self.pes).map(|_| Trigger::new()).collect();
        self.pe_pending = vec![0; self.pes];
        let mut pes = Vec::with_capacity(self.pes);
        for q in 0..self.pes {
            let mut parts = Vec::new();
            for i in (q..k).step_by(self.pes).filter(|&i| processed[i]) {
                parts.extend(self.interval_streams(i as u32, q));
            }
            pes.push(boxed(Priority::new(vec![
                boxed(self.writebacks[q].clone()),
                boxed(Watch::new(Chain::new(parts), self.chain_done[q].clone())),
            ])));
        }
        self.stream = Some(boxed(RoundRobin::new(pes)));
        self.stream_done = false;
    }

    /// Requests of source interval `i` on PE `q`.
    fn interval_streams(&mut self, i: u32, q: usize) -> Vec<BoxStream> {
        let layout = &self.layout;
        let src = layout.interval(i);
        let mut parts = vec![merged_reads(
            0,
            RegionKind::Values,
            source(SRC_PREFETCH, i as usize),
            layout.value_addr(src.start),
            src.len() as u64,
            VALUE_BYTES,
        )];
        for b in layout.blocks_of(i) {
            let block = &layout.blocks[b];
            self.remaining[b] = block.slots.len() as u64;
            self.pe_pending[q] += 1;
            for &d in &block.dst_intervals {
                let dst = layout.interval(d);
                parts.push(merged_reads(
                    0,
                    RegionKind::Values,
                    source(DST_PREFETCH, b),
                    layout.value_addr(dst.start),
                    dst.len() as u64,
                    VALUE_BYTES,
                ));
            }
            parts.push(merged_reads(
                0,
                RegionKind::Edges,
                source(EDGES, b),
                block.edge_base,
                block.slots.len() as u64,
                SHARD_RECORD_BYTES,
            ));
        }
        parts
    }

    fn process_block(&mut self, b: usize) {
        let block = &self.layout.blocks[b];
        let src_start = self.layout.interval(block.src_interval).start;
        for s in block.slots.iter().filter(|s| !s.is_null()) {
            let u = (src_start + s.src_local as u32) as usize;
            let dst_interval = block.dst_intervals[s.lane as usize];
            let v = (self.layout.interval(dst_interval).start + s.dst_local as u32) as usize;
            match self.spec.reduction() {
                Reduction::Min => {
                    let upd = self.spec.edge_update(self.values[u], 1, self.out_deg[u]);
                    if upd < self.values[v] {
                        self.values[v] = upd;
                        self.changed = true;
                        self.dirty[dst_interval as usize] = true;
                    }
                }
                Reduction::Sum => {
                    self.acc[v] += self.spec.edge_update(self.old[u], 1, self.out_deg[u]);
                }
            }
        }
    }

    fn edges_done(&mut self, b: usize, count: u64) {
        self.log.add_edges(count);
        self.remaining[b] -= count;
        if self.remaining[b] > 0 {
            return;
        }
        let block = &self.layout.blocks[b];
        let q = block.src_interval as usize % self.pes;
        self.pe_pending[q] -= 1;
        for &d in &block.dst_intervals {
            let dst = self.layout.interval(d);
            self.writebacks[q].push(merged_writes(
                0,
                RegionKind::Values,
                source(WRITEBACK, b),
                self.layout.value_addr(dst.start),
                dst.len() as u64,
                VALUE_BYTES,
            ));
        }
    }

    fn end_pass(&mut self) {
        if self.spec.reduction() == Reduction::Sum {
            for v in 0..self.n {
                self.values[v] = self.spec.apply(self.acc[v], self.old[v], self.n).0;
            }
            self.finished = true;
        } else if !self.changed {
            self.finished = true;
        } else {
            self.begin_pass();
            return;
        }
        self.stream = None;
    }
}

impl Model for ForeGraph {
    fn endpoints(&self) -> usize {
        1
    }

    fn step(&mut self, _: u64, _: &Accounting) -> Result<bool> {
        if self.finished {
            return Ok(false);
        }
        if self.stream_done {
            self.end_pass();
            return Ok(true);
        }
        let mut progressed = false;
        for q in 0..self.pes {
            let wb = &self.writebacks[q];
            if !wb.is_closed() && self.chain_done[q].fired() && self.pe_pending[q] == 0 {
                wb.close();
                progressed = true;
            }
        }
        Ok(progressed)
    }

    fn poll(&mut self, _: usize) -> Poll {
        match self.stream.as_mut() {
            None => Poll::Done,
            Some(s) => {
                let p = s.poll();
                if p == Poll::Done {
                    self.stream_done = true;
                }
                p
            }
        }
    }

    fn complete(&mut self, req: &MemRequest) -> Result<()> {
        let index = (req.source & INDEX_MASK) as usize;
        match req.source >> KIND_SHIFT {
            SRC_PREFETCH | DST_PREFETCH => self.log.add_value_read(req),
            EDGES => self.edges_done(index, req.count as u64),
            _ => {}
        }
        Ok(())
    }

    fn finished(&self) -> bool {
        self.finished
    }
}

impl Finish for ForeGraph {
    fn report(self: Box<Self>) -> ModelReport {
        let final_values = match &self.perm {
            Some(perm) => unmap_values(&self.values, perm),
            None => self.values.clone(),
        };
        ModelReport {
            iterations: self.log.iterations(),
            footprint: vec![self.layout.layout.footprint(0)],
            updates_written: 0,
            final_values,
            log: self.log,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::{run, Accelerator, Optimizations};
    use crate::algorithms::{reference_run, Problem, Scheme};
    use crate::dram::DramConfig;
    use crate::partition::test_graphs::directed;

    fn cfg(problem: Problem) -> AccelConfig {
        AccelConfig::new(Accelerator::ForeGraph, problem, DramConfig::ddr4())
    }

    #[test]
    fn matches_reference_under_every_option_set() {
        let g = directed(
            9,
            &[
                (0, 1),
                (1, 2),
                (2, 0),
                (3, 4),
                (5, 3),
                (1, 3),
                (8, 7),
                (6, 8),
                (2, 6),
            ],
        );
        let opt_sets = [
            Optimizations::none(),
            Optimizations::all_for(Accelerator::ForeGraph),
            Optimizations::only(&[Opt::StrideMap]),
            Optimizations::only(&[Opt::EdgeShuffle]),
            Optimizations::only(&[Opt::ShardSkip]),
        ];
        for p in [Problem::Bfs, Problem::Wcc, Problem::Pr] {
            let (expect, _) = reference_run(&cfg(p).problem, &g, 0, Scheme::TwoPhase).unwrap();
            for opts in &opt_sets {
                for interval in [2, 4, 16] {
                    let c = cfg(p)
                        .with_interval(interval)
                        .with_optimizations(opts.clone());
                    let r = run(&g, 0, &c).unwrap();
                    assert!(r.final_values.matches(&expect, p), "{p} {opts} {interval}");
                }
            }
        }
    }

    #[test]
    fn shuffled_edges_include_padding() {
        let g = directed(4, &[(0, 2), (0, 3), (1, 2), (0, 0)]);
        let c = cfg(Problem::Pr)
            .with_interval(2)
            .with_optimizations(Optimizations::only(&[Opt::EdgeShuffle]));
        let r = run(&g, 0, &c).unwrap();
        // shards (0,1) with 3 edges and (0,0) with 1 are zipped into 6 slots
        assert_eq!(r.edges_read_total, 6);
    }

    #[test]
    fn shard_skip_reads_fewer_edges() {
        // a backward path needs one pass per interval
        let pairs: Vec<(u32, u32)> = (0..39).rev().map(|v| (v + 1, v)).collect();
        let g = directed(40, &pairs);
        let base = cfg(Problem::Bfs).with_interval(4);
        let none = run(
            &g,
            39,
            &base.clone().with_optimizations(Optimizations::none()),
        )
        .unwrap();
        let skip = run(
            &g,
            39,
            &base.with_optimizations(Optimizations::only(&[Opt::ShardSkip])),
        )
        .unwrap();
        assert_eq!(none.final_values, skip.final_values);
        assert!(skip.edges_read_total < none.edges_read_total);
    }
}
