//! Interval-shard grid with compressed 16-bit local vertex ids.

use std::ops::Range;

use super::{
    interval, interval_count, Allocator, LayoutScheme, PartitionInfo, PartitionedLayout,
    RegionKind, VALUE_BYTES,
};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Edge id of a padding slot.
pub const NULL_EDGE: u32 = u32::MAX;
pub const MAX_SHARD_INTERVAL: u32 = 1 << 16;
const SHARD_RECORD_BYTES: u32 = 4;

/// One stored edge slot: two local ids packed into four bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub lane: u16,
    pub src_local: u16,
    pub dst_local: u16,
    pub edge_id: u32,
}

impl Slot {
    pub fn is_null(&self) -> bool {
        self.edge_id == NULL_EDGE
    }
}

/// A contiguous run of shard records sharing one source interval. Without
/// shuffling a block is exactly one shard; with shuffling up to `p` shards
/// are interleaved record by record and short lanes are padded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardBlock {
    pub src_interval: u32,
    pub dst_intervals: Vec<u32>,
    pub lane_lens: Vec<u32>,
    pub slots: Vec<Slot>,
    pub edge_base: u64,
}

impl ShardBlock {
    pub fn pads(&self) -> usize {
        self.slots.iter().filter(|s| s.is_null()).count()
    }

    pub fn real_edges(&self) -> usize {
        self.slots.len() - self.pads()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardLayout {
    pub layout: PartitionedLayout,
    pub n: usize,
    pub values_base: u64,
    /// Blocks in source-major order.
    pub blocks: Vec<ShardBlock>,
}

impl ShardLayout {
    pub fn value_addr(&self, v: u32) -> u64 {
        self.values_base + v as u64 * VALUE_BYTES as u64
    }

    pub fn interval(&self, i: u32) -> Range<u32> {
        interval(i as usize, self.layout.interval_size, self.n)
    }

    /// Indices of the blocks whose source interval is `i`.
    pub fn blocks_of(&self, i: u32) -> Range<usize> {
        let lo = self.blocks.partition_point(|b| b.src_interval < i);
        let hi = self.blocks.partition_point(|b| b.src_interval <= i);
        lo..hi
    }

    pub fn shard_count(&self) -> usize {
        self.blocks.iter().map(|b| b.dst_intervals.len()).sum()
    }

    pub fn stored_records(&self) -> u64 {
        self.blocks.iter().map(|b| b.slots.len() as u64).sum()
    }
}

/// Splits vertices into intervals of at most 65,536 and edges into the
/// resulting grid of shards; empty shards are not stored.
pub fn interval_shard(g: &Graph, interval_size: u32) -> Result<ShardLayout> {
    if interval_size == 0 || interval_size > MAX_SHARD_INTERVAL {
        return Err(Error::Layout(format!(
            "shard interval {interval_size} outside 1..={MAX_SHARD_INTERVAL}"
        )));
    }
    let n = g.n();
    let k = interval_count(n, interval_size);
    let mut grid: Vec<Vec<Slot>> = vec![Vec::new(); k * k];
    for (id, e) in g.edges().iter().enumerate() {
        let (i, j) = (e.src / interval_size, e.dst / interval_size);
        grid[i as usize * k + j as usize].push(Slot {
            lane: 0,
            src_local: (e.src % interval_size) as u16,
            dst_local: (e.dst % interval_size) as u16,
            edge_id: id as u32,
        });
    }
    let blocks = grid
        .into_iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(cell, slots)| ShardBlock {
            src_interval: (cell / k) as u32,
            dst_intervals: vec![(cell % k) as u32],
            lane_lens: vec![slots.len() as u32],
            slots,
            edge_base: 0,
        })
        .collect();
    Ok(place(n, interval_size, blocks))
}

/// Interleaves groups of up to `lanes` shards of the same source interval so
/// that parallel pipelines each receive one edge per record row.
pub fn shuffle_edges(layout: &ShardLayout, lanes: usize) -> ShardLayout {
    let lanes = lanes.max(1);
    let k = layout.layout.k as u32;
    let mut blocks = Vec::new();
    for i in 0..k {
        let shards: Vec<ShardBlock> = layout.blocks[layout.blocks_of(i)]
            .iter()
            .flat_map(split_lanes)
            .collect();
        for group in shards.chunks(lanes) {
            blocks.push(zip_group(i, group));
        }
    }
    place(layout.n, layout.layout.interval_size, blocks)
}

fn split_lanes(b: &ShardBlock) -> Vec<ShardBlock> {
    (0..b.dst_intervals.len())
        .map(|lane| {
            let slots: Vec<Slot> = b
                .slots
                .iter()
                .filter(|s| s.lane as usize == lane && !s.is_null())
                .map(|s| Slot { lane: 0, ..*s })
                .collect();
            ShardBlock {
                src_interval: b.src_interval,
                dst_intervals: vec![b.dst_intervals[lane]],
                lane_lens: vec![slots.len() as u32],
                slots,
                edge_base: 0,
            }
        })
        .collect()
}

fn zip_group(src_interval: u32, group: &[ShardBlock]) -> ShardBlock {
    let rows = group.iter().map(|b| b.slots.len()).max().unwrap_or(0);
    let mut slots = Vec::with_capacity(rows * group.len());
    for r in 0..rows {
        for (lane, b) in group.iter().enumerate() {
            slots.push(match b.slots.get(r) {
                Some(s) => Slot {
                    lane: lane as u16,
                    ..*s
                },
                None => Slot {
                    lane: lane as u16,
                    src_local: 0,
                    dst_local: 0,
                    edge_id: NULL_EDGE,
                },
            });
        }
    }
    ShardBlock {
        src_interval,
        dst_intervals: group.iter().map(|b| b.dst_intervals[0]).collect(),
        lane_lens: group.iter().map(|b| b.slots.len() as u32).collect(),
        slots,
        edge_base: 0,
    }
}

fn place(n: usize, interval_size: u32, mut blocks: Vec<ShardBlock>) -> ShardLayout {
    let k = interval_count(n, interval_size);
    let mut alloc = Allocator::new(1);
    let values_base = alloc.alloc(0, RegionKind::Values, n as u64 * VALUE_BYTES as u64);
    for b in &mut blocks {
        b.edge_base = alloc.alloc(
            0,
            RegionKind::Edges,
            b.slots.len() as u64 * SHARD_RECORD_BYTES as u64,
        );
    }
    let (regions, total_bytes) = alloc.finish();
    let mut infos = Vec::with_capacity(k);
    for p in 0..k {
        let iv = interval(p, interval_size, n);
        let mine: Vec<&ShardBlock> = blocks
            .iter()
            .filter(|b| b.src_interval == p as u32)
            .collect();
        infos.push(PartitionInfo {
            index: p,
            edge_count: mine.iter().map(|b| b.slots.len() as u64).sum(),
            channel: 0,
            value_base: values_base + iv.start as u64 * VALUE_BYTES as u64,
            edge_base: mine.first().map_or(0, |b| b.edge_base),
            interval: iv,
        });
    }
    ShardLayout {
        layout: PartitionedLayout {
            scheme: LayoutScheme::IntervalShard,
            interval_size,
            k,
            channels: 1,
            edge_record_bytes: SHARD_RECORD_BYTES,
            regions,
            partitions: infos,
            total_bytes,
        },
        n,
        values_base,
        blocks,
    }
}
