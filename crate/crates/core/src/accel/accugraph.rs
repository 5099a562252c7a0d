//! Inverted horizontally partitioned CSR with a vertex-serial pipeline that
//! applies updates as soon as a destination is materialized.

use super::common::{is_active, IterationLog, Progress};
use super::{AccelConfig, Finish, ModelReport, Opt};
use crate::algorithms::{ProblemSpec, Reduction};
use crate::dram::Kind;
use crate::error::Result;
use crate::flow::{
    boxed, merged_reads, Accounting, BoxStream, Chain, Empty, LineMerge, MemRequest, Model, Poll,
    Priority, PushQueue, RequestStream, RoundRobin,
};
use crate::graph::Graph;
use crate::partition::{horizontal_csr, CsrLayout, RegionKind, POINTER_BYTES, VALUE_BYTES};

const SRC_PREFETCH: u32 = 0;
const SRC_VALUES: u32 = 1;
const SRC_POINTERS: u32 = 2;
const SRC_NEIGHBORS: u32 = 3;
const SRC_WRITES: u32 = 4;

pub(crate) struct AccuGraph {
    spec: ProblemSpec,
    layout: CsrLayout,
    n: usize,
    out_deg: Vec<u32>,
    values: Vec<f64>,
    old: Vec<f64>,
    acc: Vec<f64>,
    dirty: Vec<bool>,
    prefetch_skip: bool,
    partition_skip: bool,
    width: u64,
    log: IterationLog,
    changed: bool,
    onchip: Option<usize>,
    current: usize,
    stream: Option<BoxStream>,
    stream_done: bool,
    writes: PushQueue,
    prefetch: Progress,
    dst_values: Progress,
    pointers: Progress,
    neighbors: Progress,
    next_vertex: usize,
    busy_until: u64,
    finished: bool,
}

impl AccuGraph {
    pub fn new(g: &Graph, root: u32, cfg: &AccelConfig) -> Result<AccuGraph> {
        let layout = horizontal_csr(g, cfg.base_interval(), true)?;
        let spec = cfg.problem;
        let values = spec.init_values(g, root)?.0;
        let dirty = layout
            .layout
            .partitions
            .iter()
            .map(|p| p.interval.clone().any(|v| is_active(values[v as usize])))
            .collect();
        let mut m = AccuGraph {
            spec,
            n: g.n(),
            out_deg: g.out_degrees(),
            old: values.clone(),
            acc: vec![0.0; g.n()],
            values,
            dirty,
            prefetch_skip: cfg.opt(Opt::PrefetchSkip),
            partition_skip: cfg.opt(Opt::PartitionSkip),
            width: cfg.pipeline_width as u64,
            log: IterationLog::default(),
            changed: false,
            onchip: None,
            current: 0,
            stream: None,
            stream_done: false,
            writes: PushQueue::new(),
            prefetch: Progress::complete_all(),
            dst_values: Progress::complete_all(),
            pointers: Progress::complete_all(),
            neighbors: Progress::complete_all(),
            next_vertex: 0,
            busy_until: 0,
            finished: false,
            layout,
        };
        m.log.begin();
        m.open_partition();
        Ok(m)
    }

    fn k(&self) -> usize {
        self.layout.layout.k
    }

    /// Opens the next partition that needs work, moving to the next pass or
    /// finishing when the current pass is exhausted.
    fn open_partition(&mut self) {
        loop {
            if self.current == self.k() {
                if self.spec.reduction() == Reduction::Sum || !self.changed {
                    self.finished = true;
                    self.stream = None;
                    return;
                }
                self.log.begin();
                self.changed = false;
                self.current = 0;
                self.old.clone_from(&self.values);
            }
            let i = self.current;
            if self.partition_skip && !self.dirty[i] {
                self.current += 1;
                continue;
            }
            self.dirty[i] = false;
            self.build_stream(i);
            return;
        }
    }

    fn build_stream(&mut self, i: usize) {
        let info = self.layout.layout.partitions[i].clone();
        let part = &self.layout.partitions[i];
        let n = self.n as u64;
        let prefetch: BoxStream = if self.prefetch_skip && self.onchip == Some(i) {
            self.prefetch = Progress::complete_all();
            boxed(Empty)
        } else {
            self.prefetch = Progress::new(info.value_base, info.len() as u64, VALUE_BYTES);
            merged_reads(
                0,
                RegionKind::Values,
                SRC_PREFETCH,
                info.value_base,
                info.len() as u64,
                VALUE_BYTES,
            )
        };
        self.onchip = Some(i);
        self.dst_values = Progress::new(self.layout.values_base, n, VALUE_BYTES);
        self.pointers = Progress::new(part.pointer_base, n + 1, POINTER_BYTES);
        self.neighbors = Progress::new(info.edge_base, info.edge_count, VALUE_BYTES);
        self.writes = PushQueue::new();
        let body = Priority::new(vec![
            boxed(LineMerge::new(self.writes.clone())),
            merged_reads(
                0,
                RegionKind::Edges,
                SRC_NEIGHBORS,
                info.edge_base,
                info.edge_count,
                VALUE_BYTES,
            ),
            boxed(RoundRobin::new(vec![
                merged_reads(
                    0,
                    RegionKind::Values,
                    SRC_VALUES,
                    self.layout.values_base,
                    n,
                    VALUE_BYTES,
                ),
                merged_reads(
                    0,
                    RegionKind::Pointers,
                    SRC_POINTERS,
                    part.pointer_base,
                    n + 1,
                    POINTER_BYTES,
                ),
            ])),
        ]);
        self.stream = Some(boxed(Chain::new(vec![prefetch, boxed(body)])));
        self.stream_done = false;
        self.next_vertex = 0;
    }

    fn vertex_ready(&self, v: usize) -> bool {
        let part = &self.layout.partitions[self.current];
        self.prefetch.finished()
            && self.dst_values.ready() > v as u64
            && self.pointers.ready() > v as u64 + 1
            && self.neighbors.ready() >= part.pointers[v + 1] as u64
    }

    fn write(&self, v: usize) {
        self.writes.push(MemRequest::record(
            Kind::Write,
            0,
            self.layout.value_addr(v as u32),
            VALUE_BYTES,
            RegionKind::Values,
            SRC_WRITES,
            v as u64,
        ));
    }

    /// Processes destination `v` of the open partition; returns the number
    /// of edges it gathered.
    fn materialize(&mut self, v: usize) -> u64 {
        let part = &self.layout.partitions[self.current];
        let range = part.range(v as u32);
        let degree = range.len() as u64;
        match self.spec.reduction() {
            Reduction::Min => {
                let mut acc = self.spec.identity();
                for &u in &part.neighbors[range] {
                    let u = u as usize;
                    let upd = self.spec.edge_update(self.values[u], 1, self.out_deg[u]);
                    acc = self.spec.reduce(acc, upd);
                }
                let (new, changed) = self.spec.apply(acc, self.values[v], self.n);
                if changed {
                    self.values[v] = new;
                    self.changed = true;
                    let p = self.layout.layout.partition_of(v as u32);
                    self.dirty[p] = true;
                    self.write(v);
                }
            }
            Reduction::Sum => {
                for &u in &part.neighbors[range] {
                    let u = u as usize;
                    self.acc[v] += self.spec.edge_update(self.old[u], 1, self.out_deg[u]);
                }
            }
        }
        degree
    }

    fn finish_partition(&mut self) {
        if self.spec.reduction() == Reduction::Sum && self.current + 1 == self.k() {
            for v in 0..self.n {
                self.values[v] = self.spec.apply(self.acc[v], self.old[v], self.n).0;
                self.write(v);
            }
            self.changed = true;
        }
        self.writes.close();
    }
}

impl Model for AccuGraph {
    fn endpoints(&self) -> usize {
        1
    }

    fn step(&mut self, cycle: u64, _: &Accounting) -> Result<bool> {
        if self.finished {
            return Ok(false);
        }
        if self.stream_done {
            self.current += 1;
            self.open_partition();
            return Ok(true);
        }
        if self.next_vertex == self.n {
            return Ok(false);
        }
        if cycle < self.busy_until {
            return Ok(true);
        }
        let v = self.next_vertex;
        if !self.vertex_ready(v) {
            return Ok(false);
        }
        let degree = self.materialize(v);
        self.busy_until = cycle + degree.div_ceil(self.width).max(1);
        self.next_vertex += 1;
        if self.next_vertex == self.n {
            self.finish_partition();
        }
        Ok(true)
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
        match req.source {
            SRC_PREFETCH => self.prefetch.line_done(req.addr),
            SRC_VALUES => self.dst_values.line_done(req.addr),
            SRC_POINTERS => self.pointers.line_done(req.addr),
            SRC_NEIGHBORS => {
                self.neighbors.line_done(req.addr);
                self.log.add_edges(req.count as u64);
            }
            _ => return Ok(()),
        }
        self.log.add_value_read(req);
        Ok(())
    }

    fn finished(&self) -> bool {
        self.finished
    }
}

impl Finish for AccuGraph {
    fn report(self: Box<Self>) -> ModelReport {
        ModelReport {
            iterations: self.log.iterations(),
            footprint: vec![self.layout.layout.footprint(0)],
            updates_written: 0,
            final_values: self.values,
            log: self.log,
        }
    }
}
