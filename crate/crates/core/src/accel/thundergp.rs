//! Destination-partitioned edge chunks spread over channels. A scatter-gather
//! phase fetches source values on demand and writes per-chunk partial
//! results; an apply phase combines the partials and replicates the new
//! values to every channel.

use std::cell::Cell;
use std::rc::Rc;

use super::common::IterationLog;
use super::{AccelConfig, Finish, ModelReport, Opt};
use crate::algorithms::{ProblemSpec, Reduction};
use crate::dram::Kind;
use crate::error::Result;
use crate::flow::{
    boxed, merged_reads, merged_writes, Accounting, BoxStream, Chain, Gate, LineMerge, MemRequest,
    Model, Poll, PushQueue, RequestStream, RoundRobin, StreamQueue, Trigger, Watch,
};
use crate::graph::Graph;
use crate::partition::{
    schedule_chunks, vertical_edge_list, RegionKind, VerticalLayout, VALUE_BYTES,
};

const KIND_SHIFT: u32 = 28;
const INDEX_MASK: u32 = (1 << KIND_SHIFT) - 1;
const DST_PREFETCH: u32 = 0;
const EDGES: u32 = 1;
const SOURCE_LOADS: u32 = 2;
const PARTIAL_WRITES: u32 = 3;
const APPLY_READS: u32 = 4;
const APPLY_WRITES: u32 = 5;
const EMPTY_SLOT: u32 = u32::MAX;

fn source(kind: u32, index: usize) -> u32 {
    (kind << KIND_SHIFT) | index as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    ScatterGather,
    Apply,
}

pub(crate) struct ThunderGP {
    spec: ProblemSpec,
    layout: VerticalLayout,
    channels: usize,
    n: usize,
    out_deg: Vec<u32>,
    weights: Option<Vec<u32>>,
    values: Vec<f64>,
    /// Reduced edge updates per chunk, indexed by local destination.
    partial: Vec<Vec<f64>>,
    /// Direct-mapped buffer of source ids per channel.
    buffers: Vec<Vec<u32>>,
    /// Chunk owning each issued source load, per channel by sequence number.
    load_chunk: Vec<Vec<usize>>,
    edges_left: Vec<u64>,
    loads_left: Vec<u64>,
    chunk_done: Vec<bool>,
    pending: Vec<usize>,
    loads: Vec<PushQueue>,
    partial_writes: Vec<StreamQueue>,
    chain_done: Vec<Trigger>,
    /// Channels holding a non-empty chunk of each partition.
    holders: Vec<Vec<usize>>,
    reads_left: Vec<u64>,
    applied: Vec<Rc<Cell<bool>>>,
    phase: Phase,
    streams: Vec<BoxStream>,
    ep_done: Vec<bool>,
    updates_written: u64,
    log: IterationLog,
    changed: bool,
    finished: bool,
}

impl ThunderGP {
    pub fn new(g: &Graph, root: u32, cfg: &AccelConfig) -> Result<ThunderGP> {
        let channels = cfg.channels;
        let weighted = cfg.problem.problem.is_weighted();
        let mut layout = vertical_edge_list(g, cfg.base_interval(), channels, weighted)?;
        if cfg.opt(Opt::ChunkSchedule) {
            layout = schedule_chunks(&layout);
        }
        let k = layout.layout.k;
        let mut holders = vec![Vec::new(); k];
        for c in &layout.chunks {
            if !c.edges.is_empty() && !holders[c.partition].contains(&c.channel) {
                holders[c.partition].push(c.channel);
            }
        }
        holders.iter_mut().for_each(|h| h.sort_unstable());
        let spec = cfg.problem;
        let chunks = layout.chunks.len();
        let mut m = ThunderGP {
            spec,
            channels,
            n: g.n(),
            out_deg: g.out_degrees(),
            weights: g.weights().map(|w| w.to_vec()),
            values: spec.init_values(g, root)?.0,
            partial: vec![Vec::new(); chunks],
            buffers: vec![vec![EMPTY_SLOT; cfg.source_buffer_entries]; channels],
            load_chunk: vec![Vec::new(); channels],
            edges_left: vec![0; chunks],
            loads_left: vec![0; chunks],
            chunk_done: vec![false; chunks],
            pending: vec![0; channels],
            loads: Vec::new(),
            partial_writes: Vec::new(),
            chain_done: Vec::new(),
            holders,
            reads_left: vec![0; k],
            applied: Vec::new(),
            phase: Phase::ScatterGather,
            streams: Vec::new(),
            ep_done: vec![false; channels],
            updates_written: 0,
            log: IterationLog::default(),
            changed: false,
            finished: false,
            layout,
        };
        m.begin_scatter_gather();
        Ok(m)
    }

    fn begin_scatter_gather(&mut self) {
        self.log.begin();
        self.changed = false;
        self.phase = Phase::ScatterGather;
        for b in &mut self.buffers {
            b.iter_mut().for_each(|s| *s = EMPTY_SLOT);
        }
        self.load_chunk.iter_mut().for_each(Vec::clear);
        self.loads = (0..self.channels).map(|_| PushQueue::new()).collect();
        self.partial_writes = (0..self.channels).map(|_| StreamQueue::new()).collect();
        self.chain_done = (0..self.channels).map(|_| Trigger::new()).collect();
        self.pending = vec![0; self.channels];
        let identity = self.spec.identity();
        let mut streams = Vec::with_capacity(self.channels);
        for c in 0..self.channels {
            let mut chain = Vec::new();
            for x in self.layout.chunks_on(c) {
                let chunk = &self.layout.chunks[x];
                if chunk.edges.is_empty() {
                    continue;
                }
                let iv = self.layout.layout.partitions[chunk.partition]
                    .interval
                    .clone();
                self.partial[x] = vec![identity; iv.len()];
                self.edges_left[x] = chunk.edges.len() as u64;
                self.loads_left[x] = 0;
                self.chunk_done[x] = false;
                self.pending[c] += 1;
                chain.push(merged_reads(
                    c,
                    RegionKind::Values,
                    source(DST_PREFETCH, x),
                    self.layout.value_addr(c, iv.start),
                    iv.len() as u64,
                    VALUE_BYTES,
                ));
                chain.push(merged_reads(
                    c,
                    RegionKind::Edges,
                    source(EDGES, x),
                    chunk.edge_base,
                    chunk.edges.len() as u64,
                    self.layout.layout.edge_record_bytes,
                ));
            }
            streams.push(boxed(RoundRobin::new(vec![
                boxed(Watch::new(Chain::new(chain), self.chain_done[c].clone())),
                boxed(LineMerge::eager(self.loads[c].clone())),
                boxed(self.partial_writes[c].clone()),
            ])));
        }
        self.streams = streams;
        self.ep_done = vec![false; self.channels];
    }

    fn begin_apply(&mut self) {
        self.phase = Phase::Apply;
        let k = self.layout.layout.k;
        self.applied = (0..k).map(|_| Rc::new(Cell::new(false))).collect();
        for j in 0..k {
            let len = self.layout.layout.partitions[j].len() as u64;
            self.reads_left[j] = len * self.holders[j].len() as u64;
            if self.reads_left[j] == 0 {
                self.apply_partition(j);
            }
        }
        let mut streams = Vec::with_capacity(self.channels);
        for c in 0..self.channels {
            let mut chain = Vec::new();
            for j in 0..k {
                let iv = self.layout.layout.partitions[j].interval.clone();
                if self.holders[j].contains(&c) {
                    chain.push(merged_reads(
                        c,
                        RegionKind::Updates,
                        source(APPLY_READS, j),
                        self.layout.update_addr(c, iv.start),
                        iv.len() as u64,
                        VALUE_BYTES,
                    ));
                }
                let flag = self.applied[j].clone();
                chain.push(boxed(Gate::new(
                    merged_writes(
                        c,
                        RegionKind::Values,
                        source(APPLY_WRITES, j),
                        self.layout.value_addr(c, iv.start),
                        iv.len() as u64,
                        VALUE_BYTES,
                    ),
                    move || flag.get(),
                )));
            }
            streams.push(boxed(Chain::new(chain)));
        }
        self.streams = streams;
        self.ep_done = vec![false; self.channels];
    }

    /// Combines the partials of partition `j` and applies them.
    fn apply_partition(&mut self, j: usize) {
        let iv = self.layout.layout.partitions[j].interval.clone();
        let chunks: Vec<usize> = (0..self.layout.chunks.len())
            .filter(|&x| {
                let c = &self.layout.chunks[x];
                c.partition == j && !c.edges.is_empty()
            })
            .collect();
        for (i, v) in iv.enumerate() {
            let v = v as usize;
            let acc = chunks.iter().fold(self.spec.identity(), |a, &x| {
                self.spec.reduce(a, self.partial[x][i])
            });
            let (new, changed) = self.spec.apply(acc, self.values[v], self.n);
            if changed {
                self.values[v] = new;
                self.changed = true;
            }
        }
        self.applied[j].set(true);
    }

    fn end_iteration(&mut self) {
        if self.spec.reduction() == Reduction::Sum || !self.changed {
            self.finished = true;
            self.streams.clear();
        } else {
            self.begin_scatter_gather();
        }
    }

    fn edges_done(&mut self, x: usize, req: &MemRequest) {
        let c = req.channel;
        let start = self.layout.layout.partitions[self.layout.chunks[x].partition]
            .interval
            .start;
        let entries = self.buffers[c].len();
        for slot in req.tags() {
            let e = self.layout.chunks[x].edges[slot as usize];
            let u = e.src as usize;
            let line = u % entries;
            if self.buffers[c][line] != e.src {
                self.buffers[c][line] = e.src;
                let seq = self.load_chunk[c].len();
                self.load_chunk[c].push(x);
                self.loads_left[x] += 1;
                self.loads[c].push(MemRequest::record(
                    Kind::Read,
                    c,
                    self.layout.value_addr(c, e.src),
                    VALUE_BYTES,
                    RegionKind::Values,
                    source(SOURCE_LOADS, 0),
                    seq as u64,
                ));
            }
            let id = self.layout.chunks[x].edge_ids[slot as usize] as usize;
            let w = self.weights.as_ref().map_or(1, |w| w[id]);
            let upd = self.spec.edge_update(self.values[u], w, self.out_deg[u]);
            let local = (e.dst - start) as usize;
            self.partial[x][local] = self.spec.reduce(self.partial[x][local], upd);
        }
        self.log.add_edges(req.count as u64);
        self.edges_left[x] -= req.count as u64;
        self.check_chunk(x);
    }

    fn loads_done(&mut self, req: &MemRequest) {
        let c = req.channel;
        for seq in req.tags() {
            let x = self.load_chunk[c][seq as usize];
            self.loads_left[x] -= 1;
            self.check_chunk(x);
        }
    }

    fn check_chunk(&mut self, x: usize) {
        if self.chunk_done[x] || self.edges_left[x] > 0 || self.loads_left[x] > 0 {
            return;
        }
        self.chunk_done[x] = true;
        let chunk = &self.layout.chunks[x];
        let c = chunk.channel;
        let iv = self.layout.layout.partitions[chunk.partition]
            .interval
            .clone();
        self.pending[c] -= 1;
        self.updates_written += iv.len() as u64;
        self.partial_writes[c].push(merged_writes(
            c,
            RegionKind::Updates,
            source(PARTIAL_WRITES, x),
            self.layout.update_addr(c, iv.start),
            iv.len() as u64,
            VALUE_BYTES,
        ));
    }

    fn apply_reads_done(&mut self, j: usize, req: &MemRequest) {
        self.reads_left[j] -= req.count as u64;
        if self.reads_left[j] == 0 {
            self.apply_partition(j);
        }
    }
}

impl Model for ThunderGP {
    fn endpoints(&self) -> usize {
        self.channels
    }

    fn step(&mut self, _: u64, _: &Accounting) -> Result<bool> {
        if self.finished {
            return Ok(false);
        }
        if self.ep_done.iter().all(|&d| d) {
            match self.phase {
                Phase::ScatterGather => self.begin_apply(),
                Phase::Apply => self.end_iteration(),
            }
            return Ok(true);
        }
        let mut progressed = false;
        if self.phase == Phase::ScatterGather {
            for c in 0..self.channels {
                if !self.loads[c].is_closed() && self.chain_done[c].fired() && self.pending[c] == 0
                {
                    self.loads[c].close();
                    self.partial_writes[c].close();
                    progressed = true;
                }
            }
        }
        Ok(progressed)
    }

    fn poll(&mut self, ep: usize) -> Poll {
        match self.streams.get_mut(ep) {
            None => Poll::Done,
            Some(s) => {
                let p = s.poll();
                if p == Poll::Done {
                    self.ep_done[ep] = true;
                }
                p
            }
        }
    }

    fn complete(&mut self, req: &MemRequest) -> Result<()> {
        let index = (req.source & INDEX_MASK) as usize;
        match req.source >> KIND_SHIFT {
            DST_PREFETCH => self.log.add_value_read(req),
            EDGES => self.edges_done(index, req),
            SOURCE_LOADS => {
                self.log.add_value_read(req);
                self.loads_done(req);
            }
            APPLY_READS => self.apply_reads_done(index, req),
            _ => {}
        }
        Ok(())
    }

    fn finished(&self) -> bool {
        self.finished
    }
}

impl Finish for ThunderGP {
    fn report(self: Box<Self>) -> ModelReport {
        ModelReport {
            iterations: self.log.iterations(),
            footprint: (0..self.channels)
                .map(|c| self.layout.layout.footprint(c))
                .collect(),
            updates_written: self.updates_written,
            final_values: self.values,
            log: self.log,
        }
    }
}
