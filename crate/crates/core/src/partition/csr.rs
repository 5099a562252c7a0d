//! Horizontally partitioned CSR.

use super::{
    interval, interval_count, Allocator, LayoutScheme, PartitionInfo, PartitionedLayout,
    RegionKind, POINTER_BYTES, VALUE_BYTES,
};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// One partition: a CSR over all `n` keyed vertices holding only the
/// neighbors that fall into the partition's interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPartition {
    pub pointers: Vec<u32>,
    pub neighbors: Vec<u32>,
    /// Index into the graph's edge list for each neighbor slot.
    pub edge_ids: Vec<u32>,
    pub pointer_base: u64,
}

impl CsrPartition {
    pub fn degree(&self, v: u32) -> u32 {
        self.pointers[v as usize + 1] - self.pointers[v as usize]
    }

    pub fn range(&self, v: u32) -> std::ops::Range<usize> {
        self.pointers[v as usize] as usize..self.pointers[v as usize + 1] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrLayout {
    pub layout: PartitionedLayout,
    pub inverted: bool,
    pub values_base: u64,
    pub partitions: Vec<CsrPartition>,
}

impl CsrLayout {
    pub fn value_addr(&self, v: u32) -> u64 {
        self.values_base + v as u64 * VALUE_BYTES as u64
    }

    pub fn pointer_addr(&self, partition: usize, v: u32) -> u64 {
        self.partitions[partition].pointer_base + v as u64 * POINTER_BYTES as u64
    }

    pub fn neighbor_addr(&self, partition: usize, slot: u64) -> u64 {
        self.layout.partitions[partition].edge_base + slot * VALUE_BYTES as u64
    }
}

/// Builds the horizontally partitioned CSR. With `inverted` the CSR is keyed
/// by destination and partitions split the source range; otherwise it is
/// keyed by source and partitions split the destination range.
pub fn horizontal_csr(g: &Graph, interval_size: u32, inverted: bool) -> Result<CsrLayout> {
    if interval_size == 0 {
        return Err(Error::Layout("interval size must be positive".into()));
    }
    let n = g.n();
    let k = interval_count(n, interval_size);
    let mut buckets: Vec<Vec<(u32, u32, u32)>> = vec![Vec::new(); k];
    for (i, e) in g.edges().iter().enumerate() {
        let (key, nb) = if inverted {
            (e.dst, e.src)
        } else {
            (e.src, e.dst)
        };
        buckets[(nb / interval_size) as usize].push((key, nb, i as u32));
    }

    let mut alloc = Allocator::new(1);
    let values_base = alloc.alloc(0, RegionKind::Values, n as u64 * VALUE_BYTES as u64);
    let mut partitions = Vec::with_capacity(k);
    let mut infos = Vec::with_capacity(k);
    for (p, mut items) in buckets.into_iter().enumerate() {
        items.sort_by_key(|&(key, nb, id)| (key, nb, id));
        let mut pointers = vec![0u32; n + 1];
        for &(key, _, _) in &items {
            pointers[key as usize + 1] += 1;
        }
        for v in 0..n {
            pointers[v + 1] += pointers[v];
        }
        let pointer_base = alloc.alloc(
            0,
            RegionKind::Pointers,
            (n as u64 + 1) * POINTER_BYTES as u64,
        );
        partitions.push(CsrPartition {
            pointers,
            neighbors: items.iter().map(|t| t.1).collect(),
            edge_ids: items.iter().map(|t| t.2).collect(),
            pointer_base,
        });
        infos.push((p, items.len() as u64));
    }
    let mut layout_parts = Vec::with_capacity(k);
    for (p, count) in infos {
        let edge_base = alloc.alloc(0, RegionKind::Edges, count * VALUE_BYTES as u64);
        let iv = interval(p, interval_size, n);
        layout_parts.push(PartitionInfo {
            index: p,
            value_base: values_base + iv.start as u64 * VALUE_BYTES as u64,
            interval: iv,
            edge_count: count,
            channel: 0,
            edge_base,
        });
    }
    let (regions, total_bytes) = alloc.finish();
    Ok(CsrLayout {
        layout: PartitionedLayout {
            scheme: LayoutScheme::Horizontal,
            interval_size,
            k,
            channels: 1,
            edge_record_bytes: VALUE_BYTES,
            regions,
            partitions: layout_parts,
            total_bytes,
        },
        inverted,
        values_base,
        partitions,
    })
}
