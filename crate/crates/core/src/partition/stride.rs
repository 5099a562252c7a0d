//! Stride relabeling of vertex ids.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Renumbers vertices so that ids congruent modulo `stride` become
/// contiguous: vertex `v` moves to `offset(v % stride) + v / stride`, where
/// `offset(r)` counts the vertices with a smaller residue. Returns the
/// relabeled graph and `perm[old] = new`.
pub fn stride_map(g: &Graph, stride: u32) -> Result<(Graph, Vec<u32>)> {
    if stride == 0 {
        return Err(Error::Layout("stride must be positive".into()));
    }
    let n = g.n() as u64;
    let k = stride as u64;
    let mut offsets = Vec::with_capacity(stride as usize);
    let mut acc = 0u64;
    for r in 0..k {
        offsets.push(acc);
        acc += if r < n { (n - r).div_ceil(k) } else { 0 };
    }
    let perm: Vec<u32> = (0..n)
        .map(|v| (offsets[(v % k) as usize] + v / k) as u32)
        .collect();
    Ok((g.relabeled(&perm), perm))
}

/// Maps values indexed by new ids back to old ids.
pub fn unmap_values(values: &[f64], perm: &[u32]) -> Vec<f64> {
    perm.iter().map(|&new| values[new as usize]).collect()
}
