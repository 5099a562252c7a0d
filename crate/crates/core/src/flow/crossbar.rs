//! Routes update records to per-partition queues by destination vertex.

use super::stream::{LineMerge, MemRequest, PushQueue};
use crate::dram::Kind;
use crate::error::{Error, Result};
use crate::partition::RegionKind;

/// Where one partition's update queue lives in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueSpec {
    pub channel: usize,
    pub base: u64,
    /// Maximum number of records.
    pub capacity: u64,
}

/// Splits one update stream into `k` sequential queue-append streams. Each
/// record is appended at the next free slot of the destination's queue.
#[derive(Debug)]
pub struct Crossbar {
    interval_size: u32,
    record_bytes: u32,
    source: u32,
    queues: Vec<QueueSpec>,
    fill: Vec<u64>,
    outputs: Vec<PushQueue>,
}

impl Crossbar {
    pub fn new(
        queues: Vec<QueueSpec>,
        interval_size: u32,
        record_bytes: u32,
        source: u32,
    ) -> Crossbar {
        let k = queues.len();
        Crossbar {
            interval_size,
            record_bytes,
            source,
            fill: vec![0; k],
            outputs: (0..k).map(|_| PushQueue::new()).collect(),
            queues,
        }
    }

    pub fn partitions(&self) -> usize {
        self.queues.len()
    }

    pub fn route(&self, dst: u32) -> Result<usize> {
        let p = (dst / self.interval_size) as usize;
        if p >= self.queues.len() {
            return Err(Error::Unroutable {
                vertex: dst,
                partitions: self.queues.len(),
            });
        }
        Ok(p)
    }

    /// Appends an update for `dst` to its partition's queue and returns the
    /// partition and slot.
    pub fn push(&mut self, dst: u32) -> Result<(usize, u64)> {
        let p = self.route(dst)?;
        let slot = self.fill[p];
        let q = self.queues[p];
        if slot >= q.capacity {
            return Err(Error::Layout(format!(
                "update queue of partition {p} overflows its {} slots",
                q.capacity
            )));
        }
        self.fill[p] += 1;
        self.outputs[p].push(MemRequest::record(
            Kind::Write,
            q.channel,
            q.base + slot * self.record_bytes as u64,
            self.record_bytes,
            RegionKind::Updates,
            self.source,
            dst as u64,
        ));
        Ok((p, slot))
    }

    /// Records appended to partition `p` so far.
    pub fn fill(&self, p: usize) -> u64 {
        self.fill[p]
    }

    /// Line-merged output stream of partition `p`.
    pub fn output(&self, p: usize) -> LineMerge<PushQueue> {
        LineMerge::new(self.outputs[p].clone())
    }

    pub fn close(&self) {
        for o in &self.outputs {
            o.close();
        }
    }

    /// Empties all queues for the next pass.
    pub fn reset(&mut self) {
        self.fill.iter_mut().for_each(|f| *f = 0);
        self.outputs = (0..self.queues.len()).map(|_| PushQueue::new()).collect();
    }
}
