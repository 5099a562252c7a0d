//! Value semantics of the supported graph problems and a memory-free
//! reference implementation of each update-propagation scheme.
//!
//! Vertex values are 32-bit quantities in memory. In the simulator they are
//! carried as `f64`: integer problems stay exact (every `u32` is representable)
//! and real-valued sums are accumulated with enough headroom that results do
//! not depend on summation order at the 1e-6 level.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Unreached sentinel for BFS and SSSP; the maximum 32-bit value.
pub const UNREACHED: f64 = u32::MAX as f64;

pub const DEFAULT_DAMPING: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Problem {
    Bfs,
    Pr,
    Wcc,
    Sssp,
    Spmv,
}

impl Problem {
    pub const ALL: [Problem; 5] = [
        Problem::Bfs,
        Problem::Pr,
        Problem::Wcc,
        Problem::Sssp,
        Problem::Spmv,
    ];

    pub fn reduction(self) -> Reduction {
        match self {
            Problem::Bfs | Problem::Wcc | Problem::Sssp => Reduction::Min,
            Problem::Pr | Problem::Spmv => Reduction::Sum,
        }
    }

    pub fn is_weighted(self) -> bool {
        matches!(self, Problem::Sssp | Problem::Spmv)
    }

    /// `Some(1)` for problems that run a single pass, `None` for problems that
    /// run until a pass makes no change.
    pub fn fixed_iterations(self) -> Option<u32> {
        match self.reduction() {
            Reduction::Sum => Some(1),
            Reduction::Min => None,
        }
    }

    /// Whether exact comparison applies to final values.
    pub fn is_integer(self) -> bool {
        self.reduction() == Reduction::Min
    }

    pub fn needs_root(self) -> bool {
        matches!(self, Problem::Bfs | Problem::Sssp)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Problem::Bfs => "BFS",
            Problem::Pr => "PR",
            Problem::Wcc => "WCC",
            Problem::Sssp => "SSSP",
            Problem::Spmv => "SpMV",
        };
        f.write_str(s)
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Problem::Bfs),
            "pr" | "pagerank" => Ok(Problem::Pr),
            "wcc" => Ok(Problem::Wcc),
            "sssp" => Ok(Problem::Sssp),
            "spmv" => Ok(Problem::Spmv),
            _ => Err(Error::Unsupported(format!("unknown problem {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Min,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub problem: Problem,
    /// Bytes per vertex value in off-chip memory.
    pub value_width: u32,
    pub damping: f64,
    /// Apply `(1 - d) / n + d * acc` at the end of the PR pass. When false the
    /// raw accumulated sum is kept.
    pub pr_normalize: bool,
}

impl ProblemSpec {
    pub fn new(problem: Problem) -> Self {
        ProblemSpec {
            problem,
            value_width: 4,
            damping: DEFAULT_DAMPING,
            pr_normalize: true,
        }
    }

    pub fn reduction(&self) -> Reduction {
        self.problem.reduction()
    }

    /// Identity element of the reduction.
    pub fn identity(&self) -> f64 {
        match self.reduction() {
            Reduction::Min => UNREACHED,
            Reduction::Sum => 0.0,
        }
    }

    pub fn reduce(&self, a: f64, b: f64) -> f64 {
        match self.reduction() {
            Reduction::Min => a.min(b),
            Reduction::Sum => a + b,
        }
    }

    pub fn init_values(&self, g: &Graph, root: u32) -> Result<VertexValues> {
        let n = g.n();
        if self.problem.needs_root() && root as usize >= n {
            return Err(Error::VertexOutOfRange {
                vertex: root as u64,
                n,
            });
        }
        let values = match self.problem {
            Problem::Bfs | Problem::Sssp => {
                let mut v = vec![UNREACHED; n];
                v[root as usize] = 0.0;
                v
            }
            Problem::Wcc => (0..n).map(|v| g.label(v as u32) as f64).collect(),
            Problem::Pr => vec![1.0 / n as f64; n],
            Problem::Spmv => vec![1.0; n],
        };
        Ok(VertexValues(values))
    }

    /// Value sent along one edge.
    pub fn edge_update(&self, src_value: f64, weight: u32, src_out_degree: u32) -> f64 {
        match self.problem {
            Problem::Bfs => (src_value + 1.0).min(UNREACHED),
            Problem::Sssp => (src_value + weight as f64).min(UNREACHED),
            Problem::Wcc => src_value,
            Problem::Pr => src_value / src_out_degree.max(1) as f64,
            Problem::Spmv => src_value * weight as f64,
        }
    }

    /// Combines the accumulated update with the old value. Returns the new
    /// value and whether it changed; fixed-iteration problems always change.
    pub fn apply(&self, accumulated: f64, old: f64, n: usize) -> (f64, bool) {
        match self.problem {
            Problem::Bfs | Problem::Wcc | Problem::Sssp => {
                let new = old.min(accumulated);
                (new, new < old)
            }
            Problem::Pr if self.pr_normalize => {
                let d = self.damping;
                ((1.0 - d) / n as f64 + d * accumulated, true)
            }
            Problem::Pr | Problem::Spmv => (accumulated, true),
        }
    }
}

/// One 32-bit value per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexValues(pub Vec<f64>);

impl VertexValues {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Exact equality for integer problems, 1e-6 relative otherwise.
    pub fn matches(&self, other: &VertexValues, problem: Problem) -> bool {
        self.first_mismatch(other, problem).is_none()
    }

    pub fn first_mismatch(&self, other: &VertexValues, problem: Problem) -> Option<usize> {
        if self.len() != other.len() {
            return Some(self.len().min(other.len()));
        }
        self.0
            .iter()
            .zip(&other.0)
            .position(|(&a, &b)| !values_match(a, b, problem))
    }
}

pub fn values_match(a: f64, b: f64, problem: Problem) -> bool {
    if problem.is_integer() {
        a == b
    } else {
        let scale = a.abs().max(b.abs());
        (a - b).abs() <= 1e-6 * scale || (a - b).abs() < 1e-300
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Updates applied as produced, destinations visited in ascending order.
    ImmediateAsc,
    /// Updates collected per pass and applied afterwards.
    TwoPhase,
    /// Only vertices changed in the previous pass produce updates.
    LevelSync,
}

/// Runs `spec` on `g` without any memory model. `iterations` counts full
/// passes, including the final pass that detects convergence.
pub fn reference_run(
    spec: &ProblemSpec,
    g: &Graph,
    root: u32,
    scheme: Scheme,
) -> Result<(VertexValues, u32)> {
    let mut values = spec.init_values(g, root)?.0;
    let out_deg = g.out_degrees();
    let n = g.n();

    if spec.reduction() == Reduction::Sum {
        // Single pass over the previous values regardless of scheme.
        let mut acc = vec![0.0; n];
        for (i, e) in g.edges().iter().enumerate() {
            let upd =
                spec.edge_update(values[e.src as usize], g.weight(i), out_deg[e.src as usize]);
            acc[e.dst as usize] += upd;
        }
        for v in 0..n {
            values[v] = spec.apply(acc[v], values[v], n).0;
        }
        return Ok((VertexValues(values), 1));
    }

    let mut iterations = 0;
    match scheme {
        Scheme::ImmediateAsc => {
            let inc = g.in_csr();
            loop {
                iterations += 1;
                let mut changed = false;
                for v in 0..n as u32 {
                    let mut acc = spec.identity();
                    for slot in inc.range(v) {
                        let u = inc.neighbors[slot] as usize;
                        let w = g.weight(inc.edge_ids[slot] as usize);
                        acc = spec.reduce(acc, spec.edge_update(values[u], w, out_deg[u]));
                    }
                    let (new, ch) = spec.apply(acc, values[v as usize], n);
                    if ch {
                        values[v as usize] = new;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        Scheme::TwoPhase | Scheme::LevelSync => {
            let level = scheme == Scheme::LevelSync;
            let mut active = vec![true; n];
            if level && spec.problem.needs_root() {
                active.iter_mut().for_each(|a| *a = false);
                active[root as usize] = true;
            }
            loop {
                iterations += 1;
                let mut acc = vec![spec.identity(); n];
                for (i, e) in g.edges().iter().enumerate() {
                    let u = e.src as usize;
                    if level && !active[u] {
                        continue;
                    }
                    let upd = spec.edge_update(values[u], g.weight(i), out_deg[u]);
                    acc[e.dst as usize] = spec.reduce(acc[e.dst as usize], upd);
                }
                let mut changed = false;
                for v in 0..n {
                    let (new, ch) = spec.apply(acc[v], values[v], n);
                    active[v] = ch;
                    if ch {
                        values[v] = new;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
    Ok((VertexValues(values), iterations))
}
