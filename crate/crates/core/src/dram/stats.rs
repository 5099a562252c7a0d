//! Per-channel request counters.

use super::config::{DramConfig, LINE_BYTES};
use super::controller::{Kind, RowClass};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DramStats {
    pub row_hits: u64,
    pub row_misses: u64,
    pub row_conflicts: u64,
    pub reads: u64,
    pub writes: u64,
    /// Data-bus cycles spent transferring bursts.
    pub busy_cycles: u64,
    pub bytes_transferred: u64,
    /// Sum of arrival-to-completion latencies in DRAM cycles.
    pub total_latency: u64,
}

impl DramStats {
    pub(crate) fn record(&mut self, kind: Kind, class: RowClass, burst: u64, latency: u64) {
        match kind {
            Kind::Read => self.reads += 1,
            Kind::Write => self.writes += 1,
        }
        match class {
            RowClass::Hit => self.row_hits += 1,
            RowClass::Miss => self.row_misses += 1,
            RowClass::Conflict => self.row_conflicts += 1,
        }
        self.busy_cycles += burst;
        self.bytes_transferred += LINE_BYTES;
        self.total_latency += latency;
    }

    pub fn merge(&mut self, other: &DramStats) {
        self.row_hits += other.row_hits;
        self.row_misses += other.row_misses;
        self.row_conflicts += other.row_conflicts;
        self.reads += other.reads;
        self.writes += other.writes;
        self.busy_cycles += other.busy_cycles;
        self.bytes_transferred += other.bytes_transferred;
        self.total_latency += other.total_latency;
    }

    pub fn requests(&self) -> u64 {
        self.reads + self.writes
    }

    pub fn classified(&self) -> u64 {
        self.row_hits + self.row_misses + self.row_conflicts
    }

    pub fn mean_latency(&self) -> f64 {
        if self.requests() == 0 {
            0.0
        } else {
            self.total_latency as f64 / self.requests() as f64
        }
    }

    /// Bytes moved relative to what `channels` channels could move at peak
    /// bandwidth over `elapsed_cycles` DRAM cycles.
    pub fn utilization(&self, config: &DramConfig, channels: usize, elapsed_cycles: u64) -> f64 {
        if elapsed_cycles == 0 {
            return 0.0;
        }
        let seconds = elapsed_cycles as f64 * config.tck_ns * 1e-9;
        self.bytes_transferred as f64 / (config.peak_bandwidth() * channels as f64 * seconds)
    }
}
