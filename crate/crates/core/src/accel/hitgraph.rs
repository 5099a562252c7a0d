//! Two-phase edge-centric processing: a scatter phase streams each
//! partition's edges and routes updates through a crossbar into per-partition
//! queues, and a gather phase applies the queued updates.

use super::common::{is_active, IterationLog};
use super::{AccelConfig, Finish, ModelReport, Opt};
use crate::algorithms::{ProblemSpec, Reduction};
use crate::dram::Kind;
use crate::error::Result;
use crate::flow::{
    boxed, merged_reads, Accounting, BoxStream, Chain, Crossbar, LineMerge, MemRequest, Model,
    Poll, PushQueue, QueueSpec, RequestStream, RoundRobin, Trigger, Watch,
};
use crate::graph::Graph;
use crate::partition::{
    horizontal_edge_list, sort_by_destination, EdgeListLayout, RegionKind, UPDATE_RECORD_BYTES,
    VALUE_BYTES,
};

const KIND_SHIFT: u32 = 28;
const INDEX_MASK: u32 = (1 << KIND_SHIFT) - 1;
const SCATTER_VALUES: u32 = 0;
const SCATTER_EDGES: u32 = 1;
const UPDATE_WRITES: u32 = 2;
const GATHER_VALUES: u32 = 3;
const UPDATE_READS: u32 = 4;
const VALUE_WRITES: u32 = 5;

fn source(kind: u32, index: usize) -> u32 {
    (kind << KIND_SHIFT) | index as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Scatter,
    Gather,
}

pub(crate) struct HitGraph {
    spec: ProblemSpec,
    layout: EdgeListLayout,
    pes: usize,
    n: usize,
    out_deg: Vec<u32>,
    weights: Option<Vec<u32>>,
    values: Vec<f64>,
    acc: Vec<f64>,
    active: Vec<bool>,
    active_next: Vec<bool>,
    partition_skip: bool,
    update_filter: bool,
    update_combine: bool,
    crossbar: Crossbar,
    /// Queued updates per partition in slot order.
    updates: Vec<Vec<(u32, f64)>>,
    combiners: Vec<Option<(u32, f64)>>,
    updates_written: u64,
    phase: Phase,
    streams: Vec<BoxStream>,
    ep_done: Vec<bool>,
    chain_done: Vec<Trigger>,
    remaining: Vec<u64>,
    pending: usize,
    closed: bool,
    value_writes: Vec<PushQueue>,
    log: IterationLog,
    changed: bool,
    finished: bool,
}

impl HitGraph {
    pub fn new(g: &Graph, root: u32, cfg: &AccelConfig) -> Result<HitGraph> {
        let pes = cfg.channels;
        let n = g.n();
        let interval = match cfg.interval_size {
            Some(i) => i,
            None => {
                let per_pe = n
                    .div_ceil((cfg.bram_budget_bytes / 4).max(1) as usize)
                    .max(1);
                n.div_ceil(pes * per_pe).max(1) as u32
            }
        };
        let weighted = cfg.problem.problem.is_weighted();
        let mut layout = horizontal_edge_list(g, interval, pes, weighted)?;
        if cfg.opt(Opt::DstSort) {
            sort_by_destination(&mut layout);
        }
        let k = layout.layout.k;
        let queues = layout
            .layout
            .partitions
            .iter()
            .zip(&layout.partitions)
            .map(|(info, p)| QueueSpec {
                channel: info.channel,
                base: p.update_base,
                capacity: p.update_capacity,
            })
            .collect();
        let spec = cfg.problem;
        let values = spec.init_values(g, root)?.0;
        let active = values.iter().map(|&v| is_active(v)).collect();
        let mut m = HitGraph {
            spec,
            pes,
            n,
            out_deg: g.out_degrees(),
            weights: g.weights().map(|w| w.to_vec()),
            acc: vec![0.0; n],
            active,
            active_next: vec![false; n],
            values,
            partition_skip: cfg.opt(Opt::PartitionSkip),
            update_filter: cfg.opt(Opt::UpdateFilter),
            update_combine: cfg.opt(Opt::UpdateCombine),
            crossbar: Crossbar::new(
                queues,
                interval,
                UPDATE_RECORD_BYTES,
                source(UPDATE_WRITES, 0),
            ),
            updates: vec![Vec::new(); k],
            combiners: vec![None; pes],
            updates_written: 0,
            phase: Phase::Scatter,
            streams: Vec::new(),
            ep_done: vec![false; pes],
            chain_done: Vec::new(),
            remaining: vec![0; k],
            pending: 0,
            closed: false,
            value_writes: Vec::new(),
            log: IterationLog::default(),
            changed: false,
            finished: false,
            layout,
        };
        m.begin_scatter();
        Ok(m)
    }

    fn partitions_on(&self, c: usize) -> impl Iterator<Item = usize> {
        (c..self.layout.layout.k).step_by(self.pes)
    }

    fn begin_scatter(&mut self) {
        self.log.begin();
        self.changed = false;
        self.phase = Phase::Scatter;
        self.crossbar.reset();
        self.updates.iter_mut().for_each(Vec::clear);
        self.pending = 0;
        self.closed = false;
        self.chain_done = (0..self.pes).map(|_| Trigger::new()).collect();
        let mut streams = Vec::with_capacity(self.pes);
        for c in 0..self.pes {
            let mut chain = Vec::new();
            for j in self.partitions_on(c) {
                let info = &self.layout.layout.partitions[j];
                if self.partition_skip && !info.interval.clone().any(|v| self.active[v as usize]) {
                    continue;
                }
                self.remaining[j] = info.edge_count;
                if info.edge_count > 0 {
                    self.pending += 1;
                }
                chain.push(merged_reads(
                    c,
                    RegionKind::Values,
                    source(SCATTER_VALUES, j),
                    info.value_base,
                    info.len() as u64,
                    VALUE_BYTES,
                ));
                chain.push(merged_reads(
                    c,
                    RegionKind::Edges,
                    source(SCATTER_EDGES, j),
                    info.edge_base,
                    info.edge_count,
                    self.layout.layout.edge_record_bytes,
                ));
            }
            let outputs = self
                .partitions_on(c)
                .map(|j| boxed(self.crossbar.output(j)))
                .collect();
            streams.push(boxed(RoundRobin::new(vec![
                boxed(Watch::new(Chain::new(chain), self.chain_done[c].clone())),
                boxed(RoundRobin::new(outputs)),
            ])));
        }
        self.streams = streams;
        self.ep_done = vec![false; self.pes];
    }

    fn begin_gather(&mut self) {
        self.phase = Phase::Gather;
        self.pending = 0;
        self.closed = false;
        self.chain_done = (0..self.pes).map(|_| Trigger::new()).collect();
        self.value_writes = (0..self.pes).map(|_| PushQueue::new()).collect();
        self.active_next.iter_mut().for_each(|a| *a = false);
        if self.spec.reduction() == Reduction::Sum {
            self.acc.iter_mut().for_each(|a| *a = 0.0);
        }
        let mut streams = Vec::with_capacity(self.pes);
        for c in 0..self.pes {
            let mut chain = Vec::new();
            for j in self.partitions_on(c) {
                let fill = self.crossbar.fill(j);
                if fill == 0 {
                    continue;
                }
                let info = &self.layout.layout.partitions[j];
                self.remaining[j] = fill;
                self.pending += 1;
                chain.push(merged_reads(
                    c,
                    RegionKind::Values,
                    source(GATHER_VALUES, j),
                    info.value_base,
                    info.len() as u64,
                    VALUE_BYTES,
                ));
                chain.push(merged_reads(
                    c,
                    RegionKind::Updates,
                    source(UPDATE_READS, j),
                    self.layout.partitions[j].update_base,
                    fill,
                    UPDATE_RECORD_BYTES,
                ));
            }
            streams.push(boxed(RoundRobin::new(vec![
                boxed(Watch::new(Chain::new(chain), self.chain_done[c].clone())),
                boxed(LineMerge::new(self.value_writes[c].clone())),
            ])));
        }
        self.streams = streams;
        self.ep_done = vec![false; self.pes];
    }

    fn end_iteration(&mut self) {
        if self.spec.reduction() == Reduction::Sum {
            for v in 0..self.n {
                self.values[v] = self.spec.apply(self.acc[v], self.values[v], self.n).0;
            }
            self.finished = true;
        } else if !self.changed {
            self.finished = true;
        } else {
            std::mem::swap(&mut self.active, &mut self.active_next);
            self.begin_scatter();
            return;
        }
        self.streams.clear();
    }

    fn push_update(&mut self, dst: u32, value: f64) -> Result<()> {
        let (p, slot) = self.crossbar.push(dst)?;
        debug_assert_eq!(slot as usize, self.updates[p].len());
        self.updates[p].push((dst, value));
        self.updates_written += 1;
        Ok(())
    }

    fn emit(&mut self, pe: usize, dst: u32, value: f64) -> Result<()> {
        if !self.update_combine {
            return self.push_update(dst, value);
        }
        match self.combiners[pe] {
            Some((d, v)) if d == dst => {
                self.combiners[pe] = Some((d, self.spec.reduce(v, value)));
                Ok(())
            }
            held => {
                self.combiners[pe] = Some((dst, value));
                match held {
                    Some((d, v)) => self.push_update(d, v),
                    None => Ok(()),
                }
            }
        }
    }

    fn flush(&mut self, pe: usize) -> Result<()> {
        match self.combiners[pe].take() {
            Some((d, v)) => self.push_update(d, v),
            None => Ok(()),
        }
    }

    fn edges_done(&mut self, j: usize, req: &MemRequest) -> Result<()> {
        let pe = req.channel;
        for slot in req.tags() {
            let e = self.layout.partitions[j].edges[slot as usize];
            let u = e.src as usize;
            if self.update_filter && !self.active[u] {
                continue;
            }
            let id = self.layout.partitions[j].edge_ids[slot as usize] as usize;
            let w = self.weights.as_ref().map_or(1, |w| w[id]);
            let upd = self.spec.edge_update(self.values[u], w, self.out_deg[u]);
            self.emit(pe, e.dst, upd)?;
        }
        self.log.add_edges(req.count as u64);
        self.remaining[j] -= req.count as u64;
        if self.remaining[j] == 0 {
            self.pending -= 1;
            self.flush(pe)?;
        }
        Ok(())
    }

    fn updates_done(&mut self, j: usize, req: &MemRequest) {
        let c = req.channel;
        for slot in req.tags() {
            let (dst, val) = self.updates[j][slot as usize];
            let v = dst as usize;
            match self.spec.reduction() {
                Reduction::Min => {
                    if val < self.values[v] {
                        self.values[v] = val;
                        self.active_next[v] = true;
                        self.changed = true;
                    }
                }
                Reduction::Sum => self.acc[v] += val,
            }
            let (ch, addr) = self.layout.value_addr(dst);
            self.value_writes[c].push(MemRequest::record(
                Kind::Write,
                ch,
                addr,
                VALUE_BYTES,
                RegionKind::Values,
                source(VALUE_WRITES, j),
                dst as u64,
            ));
        }
        self.remaining[j] -= req.count as u64;
        if self.remaining[j] == 0 {
            self.pending -= 1;
        }
    }
}

impl Model for HitGraph {
    fn endpoints(&self) -> usize {
        self.pes
    }

    fn step(&mut self, _: u64, _: &Accounting) -> Result<bool> {
        if self.finished {
            return Ok(false);
        }
        if self.ep_done.iter().all(|&d| d) {
            match self.phase {
                Phase::Scatter => self.begin_gather(),
                Phase::Gather => self.end_iteration(),
            }
            return Ok(true);
        }
        if self.closed || self.pending > 0 || !self.chain_done.iter().all(Trigger::fired) {
            return Ok(false);
        }
        self.closed = true;
        match self.phase {
            Phase::Scatter => {
                for pe in 0..self.pes {
                    self.flush(pe)?;
                }
                self.crossbar.close();
            }
            Phase::Gather => self.value_writes.iter().for_each(PushQueue::close),
        }
        Ok(true)
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
        let j = (req.source & INDEX_MASK) as usize;
        match req.source >> KIND_SHIFT {
            SCATTER_VALUES | GATHER_VALUES => self.log.add_value_read(req),
            SCATTER_EDGES => self.edges_done(j, req)?,
            UPDATE_READS => self.updates_done(j, req),
            _ => {}
        }
        Ok(())
    }

    fn finished(&self) -> bool {
        self.finished
    }
}

impl Finish for HitGraph {
    fn report(self: Box<Self>) -> ModelReport {
        ModelReport {
            iterations: self.log.iterations(),
            footprint: (0..self.pes)
                .map(|c| self.layout.layout.footprint(c))
                .collect(),
            updates_written: self.updates_written,
            final_values: self.values,
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
    use crate::partition::test_graphs::{directed, path};

    fn cfg(problem: Problem) -> AccelConfig {
        AccelConfig::new(Accelerator::HitGraph, problem, DramConfig::ddr4())
    }

    #[test]
    fn path_takes_one_pass_per_hop_plus_one() {
        let r = run(&path(4), 0, &cfg(Problem::Bfs)).unwrap();
        assert_eq!(r.iterations, 4);
        assert_eq!(r.final_values.0, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn matches_reference_across_channels_and_options() {
        let g = directed(
            10,
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
                (9, 1),
            ],
        );
        for p in crate::algorithms::Problem::ALL {
            let (expect, _) = reference_run(
                &cfg(p).problem,
                &g.clone().with_random_weights(0x5eed),
                0,
                Scheme::TwoPhase,
            )
            .unwrap();
            for channels in [1, 2, 4] {
                for opts in [
                    Optimizations::none(),
                    Optimizations::all_for(Accelerator::HitGraph),
                ] {
                    let c = cfg(p)
                        .with_channels(channels)
                        .with_interval(3)
                        .with_optimizations(opts.clone());
                    let r = run(&g, 0, &c).unwrap();
                    assert!(r.final_values.matches(&expect, p), "{p} {channels} {opts}");
                }
            }
        }
    }

    #[test]
    fn combining_collapses_a_star() {
        let pairs: Vec<(u32, u32)> = (1..9).map(|s| (s, 0)).collect();
        let g = directed(9, &pairs);
        let sorted = Optimizations::only(&[Opt::DstSort]);
        let plain = run(&g, 0, &cfg(Problem::Pr).with_optimizations(sorted.clone())).unwrap();
        let combined = run(
            &g,
            0,
            &cfg(Problem::Pr).with_optimizations(sorted.with(Opt::UpdateCombine)),
        )
        .unwrap();
        assert_eq!(plain.updates_written, 8);
        assert_eq!(combined.updates_written, 1);
        assert!(combined
            .final_values
            .matches(&plain.final_values, Problem::Pr));
    }

    #[test]
    fn filter_drops_updates_of_inactive_sources() {
        let g = path(16);
        let none = run(
            &g,
            0,
            &cfg(Problem::Bfs).with_optimizations(Optimizations::none()),
        )
        .unwrap();
        let filtered = run(
            &g,
            0,
            &cfg(Problem::Bfs).with_optimizations(Optimizations::only(&[Opt::UpdateFilter])),
        )
        .unwrap();
        assert_eq!(none.final_values, filtered.final_values);
        assert_eq!(filtered.updates_written, 15);
        assert_eq!(none.updates_written, 15 * 16);
    }
}
