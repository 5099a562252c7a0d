//! Helpers shared by the accelerator models.

use crate::algorithms::UNREACHED;
use crate::dram::LINE_BYTES;
use crate::flow::MemRequest;
use crate::partition::{RegionKind, VALUE_BYTES};

/// Whether a vertex takes part in the first pass: it holds a finite value.
pub(crate) fn is_active(value: f64) -> bool {
    value != UNREACHED
}

/// Edges and vertex values read in each pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IterationLog {
    pub edges: Vec<u64>,
    pub values: Vec<u64>,
}

impl IterationLog {
    pub fn begin(&mut self) {
        self.edges.push(0);
        self.values.push(0);
    }

    pub fn iterations(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn add_edges(&mut self, count: u64) {
        if let Some(e) = self.edges.last_mut() {
            *e += count;
        }
    }

    /// Counts value records carried by a completed read.
    pub fn add_value_read(&mut self, req: &MemRequest) {
        if req.region == RegionKind::Values {
            if let Some(v) = self.values.last_mut() {
                *v += (req.payload / VALUE_BYTES) as u64;
            }
        }
    }
}

/// Tracks which records of a sequential array read have fully arrived when
/// its lines complete in any order.
#[derive(Debug, Clone)]
pub(crate) struct Progress {
    base: u64,
    record_bytes: u64,
    count: u64,
    first_line: u64,
    done: Vec<bool>,
    prefix: usize,
}

impl Progress {
    pub fn new(base: u64, count: u64, record_bytes: u32) -> Progress {
        let first_line = base / LINE_BYTES;
        let end = base + count * record_bytes as u64;
        let lines = if count == 0 {
            0
        } else {
            (end - 1) / LINE_BYTES - first_line + 1
        };
        Progress {
            base,
            record_bytes: record_bytes as u64,
            count,
            first_line,
            done: vec![false; lines as usize],
            prefix: 0,
        }
    }

    /// An already satisfied tracker.
    pub fn complete_all() -> Progress {
        Progress::new(0, 0, 4)
    }

    pub fn line_done(&mut self, addr: u64) {
        let i = (addr / LINE_BYTES - self.first_line) as usize;
        self.done[i] = true;
        while self.prefix < self.done.len() && self.done[self.prefix] {
            self.prefix += 1;
        }
    }

    /// Records whose bytes have all arrived, counted from the start.
    pub fn ready(&self) -> u64 {
        if self.prefix == self.done.len() {
            return self.count;
        }
        let covered = (self.first_line + self.prefix as u64) * LINE_BYTES;
        (covered.saturating_sub(self.base) / self.record_bytes).min(self.count)
    }

    pub fn finished(&self) -> bool {
        self.prefix == self.done.len()
    }
}
