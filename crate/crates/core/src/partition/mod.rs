//! Byte-addressed memory images of the accelerator data structures.
//!
//! Every layout places its arrays per channel in the order values, pointers,
//! edges, update queues, each aligned to a 64-byte line.

use std::fmt;
use std::ops::Range;

mod csr;
mod edge_list;
mod shard;
mod stride;

pub use csr::{horizontal_csr, CsrLayout, CsrPartition};
pub use edge_list::{
    horizontal_edge_list, lpt_assign, schedule_chunks, sort_by_destination, vertical_edge_list,
    Chunk, EdgeListLayout, EdgePartition, VerticalLayout, UPDATE_RECORD_BYTES,
};
pub use shard::{
    interval_shard, shuffle_edges, ShardBlock, ShardLayout, Slot, MAX_SHARD_INTERVAL, NULL_EDGE,
};
pub use stride::{stride_map, unmap_values};

pub const ALIGN: u64 = 64;
pub const VALUE_BYTES: u32 = 4;
pub const POINTER_BYTES: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionKind {
    Values,
    Pointers,
    Edges,
    Updates,
}

impl RegionKind {
    pub const ALL: [RegionKind; 4] = [
        RegionKind::Values,
        RegionKind::Pointers,
        RegionKind::Edges,
        RegionKind::Updates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RegionKind::Values => "values",
            RegionKind::Pointers => "pointers",
            RegionKind::Edges => "edges",
            RegionKind::Updates => "updates",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutScheme {
    Horizontal,
    Vertical,
    IntervalShard,
}

impl fmt::Display for LayoutScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LayoutScheme::Horizontal => "horizontal",
            LayoutScheme::Vertical => "vertical",
            LayoutScheme::IntervalShard => "interval-shard",
        })
    }
}

/// A named address range on one channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub kind: RegionKind,
    pub channel: usize,
    pub base: u64,
    pub len: u64,
}

impl Region {
    pub fn end(&self) -> u64 {
        self.base + self.len
    }
}

/// Bookkeeping for one vertex interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInfo {
    pub index: usize,
    pub interval: Range<u32>,
    /// Stored edge records, padding included.
    pub edge_count: u64,
    pub channel: usize,
    pub value_base: u64,
    pub edge_base: u64,
}

impl PartitionInfo {
    pub fn len(&self) -> u32 {
        self.interval.end - self.interval.start
    }

    pub fn is_empty(&self) -> bool {
        self.interval.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionedLayout {
    pub scheme: LayoutScheme,
    pub interval_size: u32,
    pub k: usize,
    pub channels: usize,
    pub edge_record_bytes: u32,
    pub regions: Vec<Region>,
    pub partitions: Vec<PartitionInfo>,
    /// Bytes spanned per channel, alignment padding included.
    pub total_bytes: Vec<u64>,
}

impl PartitionedLayout {
    /// Sum of region sizes on a channel, without alignment padding.
    pub fn footprint(&self, channel: usize) -> u64 {
        self.regions
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| r.len)
            .sum()
    }

    pub fn regions_on(&self, channel: usize) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(move |r| r.channel == channel)
    }

    pub fn partition_of(&self, v: u32) -> usize {
        (v / self.interval_size) as usize
    }
}

impl fmt::Display for PartitionedLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "layout {} k={} interval={} channels={} edge_record={}B",
            self.scheme, self.k, self.interval_size, self.channels, self.edge_record_bytes
        )?;
        for ch in 0..self.channels {
            writeln!(f, "channel {ch} ({:#x} bytes)", self.total_bytes[ch])?;
            for r in self.regions_on(ch) {
                writeln!(
                    f,
                    "  {:<9} base {:#012x} size {:#012x}",
                    r.kind.name(),
                    r.base,
                    r.len
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn interval_count(n: usize, interval_size: u32) -> usize {
    n.div_ceil(interval_size.max(1) as usize).max(1)
}

pub(crate) fn interval(index: usize, interval_size: u32, n: usize) -> Range<u32> {
    let start = (index as u64 * interval_size as u64).min(n as u64) as u32;
    let end = ((index as u64 + 1) * interval_size as u64).min(n as u64) as u32;
    start..end
}

pub(crate) fn align_up(x: u64) -> u64 {
    x.div_ceil(ALIGN) * ALIGN
}

/// Hands out 64-byte aligned regions per channel in allocation order.
#[derive(Debug)]
pub(crate) struct Allocator {
    cursors: Vec<u64>,
    regions: Vec<Region>,
}

impl Allocator {
    pub fn new(channels: usize) -> Self {
        Allocator {
            cursors: vec![0; channels],
            regions: Vec::new(),
        }
    }

    pub fn alloc(&mut self, channel: usize, kind: RegionKind, len: u64) -> u64 {
        let base = align_up(self.cursors[channel]);
        self.cursors[channel] = base + len;
        self.regions.push(Region {
            kind,
            channel,
            base,
            len,
        });
        base
    }

    pub fn finish(self) -> (Vec<Region>, Vec<u64>) {
        let totals = self.cursors.iter().map(|&c| align_up(c)).collect();
        (self.regions, totals)
    }
}
