//! Edge-list layouts: horizontal (source intervals, one channel per
//! partition) and vertical (destination intervals, chunked over channels).

use super::{
    interval, interval_count, Allocator, LayoutScheme, PartitionInfo, PartitionedLayout,
    RegionKind, VALUE_BYTES,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

/// Destination id plus value.
pub const UPDATE_RECORD_BYTES: u32 = 8;

fn edge_record_bytes(weighted: bool) -> u32 {
    if weighted {
        12
    } else {
        8
    }
}

fn check(interval_size: u32, channels: usize) -> Result<()> {
    if interval_size == 0 {
        return Err(Error::Layout("interval size must be positive".into()));
    }
    if channels == 0 {
        return Err(Error::Layout("at least one channel is required".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePartition {
    pub edges: Vec<Edge>,
    pub edge_ids: Vec<u32>,
    pub update_base: u64,
    /// Update records the queue can hold: the in-edge count of the interval.
    pub update_capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeListLayout {
    pub layout: PartitionedLayout,
    pub partitions: Vec<EdgePartition>,
}

impl EdgeListLayout {
    pub fn value_addr(&self, v: u32) -> (usize, u64) {
        let info = &self.layout.partitions[self.layout.partition_of(v)];
        (
            info.channel,
            info.value_base + (v - info.interval.start) as u64 * VALUE_BYTES as u64,
        )
    }

    pub fn edge_addr(&self, partition: usize, slot: u64) -> u64 {
        self.layout.partitions[partition].edge_base + slot * self.layout.edge_record_bytes as u64
    }

    pub fn update_addr(&self, partition: usize, slot: u64) -> u64 {
        self.partitions[partition].update_base + slot * UPDATE_RECORD_BYTES as u64
    }
}

/// Source-interval partitions with each partition's edges, values and update
/// queue placed on channel `index % channels`.
pub fn horizontal_edge_list(
    g: &Graph,
    interval_size: u32,
    channels: usize,
    weighted: bool,
) -> Result<EdgeListLayout> {
    check(interval_size, channels)?;
    let n = g.n();
    let k = interval_count(n, interval_size);
    let mut parts: Vec<(Vec<Edge>, Vec<u32>)> = vec![(Vec::new(), Vec::new()); k];
    let mut in_counts = vec![0u64; k];
    for (i, e) in g.edges().iter().enumerate() {
        let p = &mut parts[(e.src / interval_size) as usize];
        p.0.push(*e);
        p.1.push(i as u32);
        in_counts[(e.dst / interval_size) as usize] += 1;
    }
    let rec = edge_record_bytes(weighted);
    Ok(place_horizontal(
        n,
        interval_size,
        channels,
        rec,
        parts,
        in_counts,
    ))
}

fn place_horizontal(
    n: usize,
    interval_size: u32,
    channels: usize,
    rec: u32,
    parts: Vec<(Vec<Edge>, Vec<u32>)>,
    in_counts: Vec<u64>,
) -> EdgeListLayout {
    let k = parts.len();
    let mut alloc = Allocator::new(channels);
    let mut value_base = vec![0; k];
    let mut edge_base = vec![0; k];
    let mut update_base = vec![0; k];
    for ch in 0..channels {
        let mine: Vec<usize> = (ch..k).step_by(channels).collect();
        for &p in &mine {
            let len = interval(p, interval_size, n).len() as u64;
            value_base[p] = alloc.alloc(ch, RegionKind::Values, len * VALUE_BYTES as u64);
        }
        for &p in &mine {
            edge_base[p] = alloc.alloc(ch, RegionKind::Edges, parts[p].0.len() as u64 * rec as u64);
        }
        for &p in &mine {
            update_base[p] = alloc.alloc(
                ch,
                RegionKind::Updates,
                in_counts[p] * UPDATE_RECORD_BYTES as u64,
            );
        }
    }
    let (regions, total_bytes) = alloc.finish();
    let infos = (0..k)
        .map(|p| PartitionInfo {
            index: p,
            interval: interval(p, interval_size, n),
            edge_count: parts[p].0.len() as u64,
            channel: p % channels,
            value_base: value_base[p],
            edge_base: edge_base[p],
        })
        .collect();
    let partitions = parts
        .into_iter()
        .enumerate()
        .map(|(p, (edges, edge_ids))| EdgePartition {
            edges,
            edge_ids,
            update_base: update_base[p],
            update_capacity: in_counts[p],
        })
        .collect();
    EdgeListLayout {
        layout: PartitionedLayout {
            scheme: LayoutScheme::Horizontal,
            interval_size,
            k,
            channels,
            edge_record_bytes: rec,
            regions,
            partitions: infos,
            total_bytes,
        },
        partitions,
    }
}

/// Stable sort of every partition's edges by destination.
pub fn sort_by_destination(layout: &mut EdgeListLayout) {
    for p in &mut layout.partitions {
        let mut idx: Vec<usize> = (0..p.edges.len()).collect();
        idx.sort_by_key(|&i| p.edges[i].dst);
        p.edges = idx.iter().map(|&i| p.edges[i]).collect();
        p.edge_ids = idx.iter().map(|&i| p.edge_ids[i]).collect();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub partition: usize,
    /// Position of the chunk within its partition.
    pub index: usize,
    pub channel: usize,
    pub edges: Vec<Edge>,
    pub edge_ids: Vec<u32>,
    pub edge_base: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalLayout {
    pub layout: PartitionedLayout,
    pub chunks: Vec<Chunk>,
    pub n: usize,
    pub values_base: Vec<u64>,
    pub update_base: Vec<u64>,
}

impl VerticalLayout {
    pub fn value_addr(&self, channel: usize, v: u32) -> u64 {
        self.values_base[channel] + v as u64 * VALUE_BYTES as u64
    }

    pub fn update_addr(&self, channel: usize, v: u32) -> u64 {
        self.update_base[channel] + v as u64 * VALUE_BYTES as u64
    }

    pub fn edge_addr(&self, chunk: usize, slot: u64) -> u64 {
        self.chunks[chunk].edge_base + slot * self.layout.edge_record_bytes as u64
    }

    /// Chunk indices stored on `channel`, ordered by partition.
    pub fn chunks_on(&self, channel: usize) -> Vec<usize> {
        (0..self.chunks.len())
            .filter(|&c| self.chunks[c].channel == channel)
            .collect()
    }

    /// Predicted work of a chunk: edges plus destination values touched.
    pub fn chunk_load(&self, chunk: usize) -> u64 {
        let c = &self.chunks[chunk];
        c.edges.len() as u64 + self.layout.partitions[c.partition].len() as u64
    }
}

/// Destination-interval partitions; each partition's edges are ordered by
/// source and split by position into one chunk per channel.
pub fn vertical_edge_list(
    g: &Graph,
    interval_size: u32,
    channels: usize,
    weighted: bool,
) -> Result<VerticalLayout> {
    check(interval_size, channels)?;
    let n = g.n();
    let k = interval_count(n, interval_size);
    let mut parts: Vec<Vec<(Edge, u32)>> = vec![Vec::new(); k];
    for (i, e) in g.edges().iter().enumerate() {
        parts[(e.dst / interval_size) as usize].push((*e, i as u32));
    }
    let mut chunks = Vec::with_capacity(k * channels);
    for (p, mut items) in parts.into_iter().enumerate() {
        items.sort_by_key(|&(e, id)| (e.src, e.dst, id));
        let len = items.len();
        for c in 0..channels {
            let slice = &items[c * len / channels..(c + 1) * len / channels];
            chunks.push(Chunk {
                partition: p,
                index: c,
                channel: c,
                edges: slice.iter().map(|t| t.0).collect(),
                edge_ids: slice.iter().map(|t| t.1).collect(),
                edge_base: 0,
            });
        }
    }
    Ok(place_vertical(
        n,
        interval_size,
        channels,
        edge_record_bytes(weighted),
        chunks,
    ))
}

fn place_vertical(
    n: usize,
    interval_size: u32,
    channels: usize,
    rec: u32,
    mut chunks: Vec<Chunk>,
) -> VerticalLayout {
    let k = interval_count(n, interval_size);
    let mut alloc = Allocator::new(channels);
    let mut values_base = vec![0; channels];
    let mut update_base = vec![0; channels];
    for ch in 0..channels {
        values_base[ch] = alloc.alloc(ch, RegionKind::Values, n as u64 * VALUE_BYTES as u64);
        for c in chunks.iter_mut().filter(|c| c.channel == ch) {
            c.edge_base = alloc.alloc(ch, RegionKind::Edges, c.edges.len() as u64 * rec as u64);
        }
        update_base[ch] = alloc.alloc(ch, RegionKind::Updates, n as u64 * VALUE_BYTES as u64);
    }
    let (regions, total_bytes) = alloc.finish();
    let infos = (0..k)
        .map(|p| {
            let iv = interval(p, interval_size, n);
            PartitionInfo {
                index: p,
                edge_count: chunks
                    .iter()
                    .filter(|c| c.partition == p)
                    .map(|c| c.edges.len() as u64)
                    .sum(),
                channel: 0,
                value_base: iv.start as u64 * VALUE_BYTES as u64,
                edge_base: 0,
                interval: iv,
            }
        })
        .collect();
    VerticalLayout {
        layout: PartitionedLayout {
            scheme: LayoutScheme::Vertical,
            interval_size,
            k,
            channels,
            edge_record_bytes: rec,
            regions,
            partitions: infos,
            total_bytes,
        },
        chunks,
        n,
        values_base,
        update_base,
    }
}

/// Longest-processing-time assignment: jobs in decreasing load, each to the
/// currently least loaded bin; ties go to the lower index.
pub fn lpt_assign(loads: &[u64], bins: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..loads.len()).collect();
    order.sort_by(|&a, &b| loads[b].cmp(&loads[a]).then(a.cmp(&b)));
    let mut totals = vec![0u64; bins.max(1)];
    let mut out = vec![0; loads.len()];
    for j in order {
        let bin = (0..totals.len()).min_by_key(|&b| (totals[b], b)).unwrap();
        totals[bin] += loads[j];
        out[j] = bin;
    }
    out
}

/// Reassigns chunks to channels by predicted load.
pub fn schedule_chunks(layout: &VerticalLayout) -> VerticalLayout {
    let loads: Vec<u64> = (0..layout.chunks.len())
        .map(|c| layout.chunk_load(c))
        .collect();
    let assign = lpt_assign(&loads, layout.layout.channels);
    let chunks = layout
        .chunks
        .iter()
        .zip(assign)
        .map(|(c, ch)| Chunk {
            channel: ch,
            ..c.clone()
        })
        .collect();
    place_vertical(
        layout.n,
        layout.layout.interval_size,
        layout.layout.channels,
        layout.layout.edge_record_bytes,
        chunks,
    )
}
