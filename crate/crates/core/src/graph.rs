//! Graph ingestion: SNAP edge lists, Graph500-style R-MAT generation, a binary
//! cache format and degree statistics.
//!
//! Vertex ids are dense `u32` values. Files with sparse ids are relabeled in
//! first-appearance order; the original ids are kept so that root vertices can
//! be given in the numbering of the source file.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Graph500 R-MAT quadrant probabilities (a, b, c, d).
pub const RMAT_PARAMS: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

const CACHE_MAGIC: &[u8; 8] = b"GSIMEDG1";
const FLAG_DIRECTED: u32 = 1;
const FLAG_WEIGHTED: u32 = 1 << 1;
const FLAG_LABELS: u32 = 1 << 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
}

impl Edge {
    pub fn new(src: u32, dst: u32) -> Self {
        Edge { src, dst }
    }
}

/// An immutable loaded graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub name: String,
    n: usize,
    edges: Vec<Edge>,
    weights: Option<Vec<u32>>,
    directed: bool,
    original_edge_count: u64,
    /// Original id of each dense vertex; `None` means identity.
    labels: Option<Vec<u64>>,
}

impl Graph {
    /// Builds a graph from already-dense edges. For `directed = false` the
    /// caller's edges are mirrored, so every input edge is stored twice.
    pub fn from_edges(
        name: impl Into<String>,
        n: usize,
        edges: Vec<Edge>,
        weights: Option<Vec<u32>>,
        directed: bool,
    ) -> Result<Self> {
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(Error::InvalidGraph(format!(
                    "{} weights for {} edges",
                    w.len(),
                    edges.len()
                )));
            }
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidGraph(format!(
                "{n} vertices exceed 32-bit ids"
            )));
        }
        for e in &edges {
            let hi = e.src.max(e.dst) as usize;
            if hi >= n {
                return Err(Error::VertexOutOfRange {
                    vertex: hi as u64,
                    n,
                });
            }
        }
        let original_edge_count = edges.len() as u64;
        let (edges, weights) = if directed {
            (edges, weights)
        } else {
            mirror(edges, weights)
        };
        Ok(Graph {
            name: name.into(),
            n,
            edges,
            weights,
            directed,
            original_edge_count,
            labels: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored edge count (undirected inputs are stored in both directions).
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, edge: usize) -> u32 {
        self.weights.as_ref().map_or(1, |w| w[edge])
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Edge count of the source file or generator; the |E| used for MTEPS.
    pub fn original_edge_count(&self) -> u64 {
        self.original_edge_count
    }

    /// Original id of a dense vertex.
    pub fn label(&self, v: u32) -> u64 {
        self.labels.as_ref().map_or(v as u64, |l| l[v as usize])
    }

    /// Translates a vertex id in the source numbering into a dense id.
    pub fn resolve_vertex(&self, original: u64) -> Result<u32> {
        match &self.labels {
            None if (original as usize) < self.n => Ok(original as u32),
            None => Err(Error::VertexOutOfRange {
                vertex: original,
                n: self.n,
            }),
            Some(labels) => labels
                .iter()
                .position(|&l| l == original)
                .map(|p| p as u32)
                .ok_or(Error::VertexOutOfRange {
                    vertex: original,
                    n: self.n,
                }),
        }
    }

    /// Attaches deterministic pseudo-random weights in `1..=255`.
    pub fn with_random_weights(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if self.directed {
            self.weights = Some(
                (0..self.edges.len())
                    .map(|_| rng.gen_range(1..=255))
                    .collect(),
            );
        } else {
            // Both directions of an undirected edge carry the same weight.
            let half = self.edges.len() / 2;
            let w: Vec<u32> = (0..half).map(|_| rng.gen_range(1..=255)).collect();
            self.weights = Some(w.iter().chain(w.iter()).copied().collect());
        }
        self
    }

    /// Returns a copy with vertices renamed by `perm[old] = new`.
    pub fn relabeled(&self, perm: &[u32]) -> Graph {
        debug_assert_eq!(perm.len(), self.n);
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.src as usize], perm[e.dst as usize]))
            .collect();
        let mut labels = vec![0u64; self.n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new as usize] = self.label(old as u32);
        }
        Graph {
            name: self.name.clone(),
            n: self.n,
            edges,
            weights: self.weights.clone(),
            directed: self.directed,
            original_edge_count: self.original_edge_count,
            labels: Some(labels),
        }
    }

    pub fn out_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for e in &self.edges {
            deg[e.src as usize] += 1;
        }
        deg
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for e in &self.edges {
            deg[e.dst as usize] += 1;
        }
        deg
    }

    /// Forward adjacency (out-edges) in CSR form.
    pub fn out_csr(&self) -> Csr {
        Csr::build(
            self.n,
            self.edges
                .iter()
                .enumerate()
                .map(|(i, e)| (e.src, e.dst, i)),
        )
    }

    /// Inverted adjacency (in-edges) in CSR form; neighbors are sources.
    pub fn in_csr(&self) -> Csr {
        Csr::build(
            self.n,
            self.edges
                .iter()
                .enumerate()
                .map(|(i, e)| (e.dst, e.src, i)),
        )
    }

    /// Writes the binary cache format: magic, n, m, flags, original edge count,
    /// then fixed-width little-endian `(src, dst[, weight])` records and the
    /// optional original-id table.
    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut flags = 0;
        if self.directed {
            flags |= FLAG_DIRECTED;
        }
        if self.weights.is_some() {
            flags |= FLAG_WEIGHTED;
        }
        if self.labels.is_some() {
            flags |= FLAG_LABELS;
        }
        let io = |e| Error::io(path, e);
        w.write_all(CACHE_MAGIC).map_err(io)?;
        w.write_all(&(self.n as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.edges.len() as u64).to_le_bytes())
            .map_err(io)?;
        w.write_all(&flags.to_le_bytes()).map_err(io)?;
        w.write_all(&self.original_edge_count.to_le_bytes())
            .map_err(io)?;
        let name = self.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())
            .map_err(io)?;
        w.write_all(name).map_err(io)?;
        for (i, e) in self.edges.iter().enumerate() {
            w.write_all(&e.src.to_le_bytes()).map_err(io)?;
            w.write_all(&e.dst.to_le_bytes()).map_err(io)?;
            if let Some(ws) = &self.weights {
                w.write_all(&ws[i].to_le_bytes()).map_err(io)?;
            }
        }
        if let Some(labels) = &self.labels {
            for l in labels {
                w.write_all(&l.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Graph> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let bad = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: msg.to_string(),
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != CACHE_MAGIC {
            return Err(bad("not a graph cache file"));
        }
        let mut rd = Reader { r: &mut r, path };
        let n = rd.u64()? as usize;
        let m = rd.u64()? as usize;
        let flags = rd.u32()?;
        let original_edge_count = rd.u64()?;
        let name_len = rd.u32()? as usize;
        let mut name = vec![0u8; name_len];
        rd.r.read_exact(&mut name).map_err(|e| Error::io(path, e))?;
        let name = String::from_utf8(name).map_err(|_| bad("graph name is not utf-8"))?;
        let weighted = flags & FLAG_WEIGHTED != 0;
        let mut edges = Vec::with_capacity(m);
        let mut weights = weighted.then(|| Vec::with_capacity(m));
        for _ in 0..m {
            let src = rd.u32()?;
            let dst = rd.u32()?;
            if src.max(dst) as usize >= n {
                return Err(bad("edge endpoint out of range"));
            }
            edges.push(Edge::new(src, dst));
            if let Some(ws) = weights.as_mut() {
                ws.push(rd.u32()?);
            }
        }
        let labels = if flags & FLAG_LABELS != 0 {
            let mut l = Vec::with_capacity(n);
            for _ in 0..n {
                l.push(rd.u64()?);
            }
            Some(l)
        } else {
            None
        };
        Ok(Graph {
            name,
            n,
            edges,
            weights,
            directed: flags & FLAG_DIRECTED != 0,
            original_edge_count,
            labels,
        })
    }
}

struct Reader<'a, R: Read> {
    r: &'a mut R,
    path: &'a Path,
}

impl<R: Read> Reader<'_, R> {
    fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.r
            .read_exact(&mut b)
            .map_err(|e| Error::io(self.path, e))?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.r
            .read_exact(&mut b)
            .map_err(|e| Error::io(self.path, e))?;
        Ok(u64::from_le_bytes(b))
    }
}

fn mirror(edges: Vec<Edge>, weights: Option<Vec<u32>>) -> (Vec<Edge>, Option<Vec<u32>>) {
    let mut out = Vec::with_capacity(edges.len() * 2);
    out.extend_from_slice(&edges);
    out.extend(edges.iter().map(|e| Edge::new(e.dst, e.src)));
    let weights = weights.map(|w| w.iter().chain(w.iter()).copied().collect());
    (out, weights)
}

/// Compressed adjacency: `neighbors[offsets[v]..offsets[v + 1]]`, with the
/// index of the originating edge alongside each neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    pub offsets: Vec<u32>,
    pub neighbors: Vec<u32>,
    pub edge_ids: Vec<u32>,
}

impl Csr {
    fn build(n: usize, items: impl Iterator<Item = (u32, u32, usize)> + Clone) -> Csr {
        let mut offsets = vec![0u32; n + 1];
        for (key, _, _) in items.clone() {
            offsets[key as usize + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let m = offsets[n] as usize;
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; m];
        let mut edge_ids = vec![0u32; m];
        for (key, nb, id) in items {
            let slot = cursor[key as usize] as usize;
            neighbors[slot] = nb;
            edge_ids[slot] = id as u32;
            cursor[key as usize] += 1;
        }
        Csr {
            offsets,
            neighbors,
            edge_ids,
        }
    }

    pub fn range(&self, v: u32) -> std::ops::Range<usize> {
        self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }
}

/// Loads a whitespace-separated `src dst [weight]` edge list. Lines starting
/// with `#` or `%` are comments. Ids are densely relabeled in first-appearance
/// order. When `directed` is false each line is stored in both directions.
pub fn load_edge_list(path: impl AsRef<Path>, weighted: bool, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut ids: HashMap<u64, u32> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut id = |name: &str| -> Result<u64> {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {name} field")))?;
            tok.parse::<u64>()
                .map_err(|_| parse_err(lineno, format!("bad {name} id {tok:?}")))
        };
        let src = id("source")?;
        let dst = id("destination")?;
        if weighted {
            let tok = fields
                .next()
                .ok_or_else(|| parse_err(lineno, "missing weight field".into()))?;
            let w = tok
                .parse::<u32>()
                .or_else(|_| tok.parse::<f32>().map(|f| f.round().max(0.0) as u32))
                .map_err(|_| parse_err(lineno, format!("bad weight {tok:?}")))?;
            weights.push(w);
        }
        let mut dense = |orig: u64| -> Result<u32> {
            if let Some(&d) = ids.get(&orig) {
                return Ok(d);
            }
            let d = u32::try_from(labels.len())
                .map_err(|_| parse_err(lineno, "more than 2^32 vertices".into()))?;
            ids.insert(orig, d);
            labels.push(orig);
            Ok(d)
        };
        let s = dense(src)?;
        let d = dense(dst)?;
        edges.push(Edge::new(s, d));
    }
    if edges.is_empty() {
        return Err(Error::NoEdges(path.display().to_string()));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let n = labels.len();
    let mut g = Graph::from_edges(name, n, edges, weighted.then_some(weights), directed)?;
    let identity = labels.iter().enumerate().all(|(i, &l)| i as u64 == l);
    if !identity {
        g.labels = Some(labels);
    }
    Ok(g)
}

/// Generates a directed R-MAT graph with `2^scale` vertices and exactly
/// `2^scale * avg_degree` edges using the Graph500 quadrant probabilities.
/// Vertex ids are scrambled by a seeded permutation, as in Graph500.
pub fn generate_rmat(scale: u32, avg_degree: u32, seed: u64) -> Result<Graph> {
    if scale == 0 || avg_degree == 0 {
        return Err(Error::InvalidGraph(
            "scale and degree must be at least 1".into(),
        ));
    }
    if scale > 31 {
        return Err(Error::InvalidGraph(format!(
            "scale {scale} exceeds 32-bit vertex ids"
        )));
    }
    let n = 1usize << scale;
    let m = n
        .checked_mul(avg_degree as usize)
        .filter(|&m| m <= u32::MAX as usize)
        .ok_or_else(|| Error::InvalidGraph("edge count exceeds address space".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [a, b, c, _] = RMAT_PARAMS;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (mut src, mut dst) = (0u32, 0u32);
        for bit in (0..scale).rev() {
            let r: f64 = rng.gen();
            let (sb, db) = if r < a {
                (0, 0)
            } else if r < a + b {
                (0, 1)
            } else if r < a + b + c {
                (1, 0)
            } else {
                (1, 1)
            };
            src |= sb << bit;
            dst |= db << bit;
        }
        edges.push(Edge::new(src, dst));
    }
    // Fisher-Yates scramble of vertex labels.
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    for e in &mut edges {
        e.src = perm[e.src as usize];
        e.dst = perm[e.dst as usize];
    }
    Graph::from_edges(format!("rmat-{scale}-{avg_degree}"), n, edges, None, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub avg_degree: f64,
    /// Pearson's moment coefficient of skewness of the out-degrees.
    pub skewness: f64,
    /// Set when all degrees are equal and skewness is undefined (reported as 0).
    pub uniform_degrees: bool,
    pub degree_histogram: BTreeMap<u32, u64>,
    pub diameter_estimate: Option<u32>,
}

pub fn stats(g: &Graph) -> Result<GraphStats> {
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let deg = g.out_degrees();
    let n = g.n() as f64;
    let mean = g.m() as f64 / n;
    let var = deg.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt();
    let uniform_degrees = sigma == 0.0;
    let skewness = if uniform_degrees {
        0.0
    } else {
        deg.iter()
            .map(|&d| ((d as f64 - mean) / sigma).powi(3))
            .sum::<f64>()
            / n
    };
    let mut degree_histogram = BTreeMap::new();
    for &d in &deg {
        *degree_histogram.entry(d).or_insert(0) += 1;
    }
    Ok(GraphStats {
        n: g.n(),
        m: g.m(),
        avg_degree: mean,
        skewness,
        uniform_degrees,
        degree_histogram,
        diameter_estimate: diameter_double_sweep(g),
    })
}

/// Lower bound on the diameter of the undirected view by a double BFS sweep
/// starting from the highest-degree vertex.
fn diameter_double_sweep(g: &Graph) -> Option<u32> {
    if g.m() == 0 {
        return None;
    }
    let mut adj_edges = Vec::with_capacity(g.m() * 2);
    for e in g.edges() {
        adj_edges.push((e.src, e.dst, 0));
        adj_edges.push((e.dst, e.src, 0));
    }
    let adj = Csr::build(g.n(), adj_edges.into_iter());
    let start = (0..g.n() as u32).max_by_key(|&v| (adj.degree(v), std::cmp::Reverse(v)))?;
    let (far, _) = bfs_farthest(&adj, start);
    let (_, ecc) = bfs_farthest(&adj, far);
    Some(ecc)
}

fn bfs_farthest(adj: &Csr, start: u32) -> (u32, u32) {
    let n = adj.offsets.len() - 1;
    let mut dist = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[start as usize] = 0;
    queue.push_back(start);
    let mut last = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        if d > last.1 {
            last = (v, d);
        }
        for &u in &adj.neighbors[adj.range(v)] {
            if dist[u as usize] == u32::MAX {
                dist[u as usize] = d + 1;
                queue.push_back(u);
            }
        }
    }
    last
}

/// Root vertices (in source-file numbering) for the benchmark graphs,
/// keyed by short name.
pub const DEFAULT_ROOTS: [(&str, u64); 12] = [
    ("tw", 2748769),
    ("lj", 772860),
    ("or", 1386825),
    ("wt", 17540),
    ("pk", 315318),
    ("yt", 140289),
    ("db", 9799),
    ("sd", 30279),
    ("rd", 1166467),
    ("bk", 546279),
    ("r24", 535262),
    ("r21", 74764),
];

/// Maps common file names of the benchmark graphs to their short names.
pub fn short_name(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    let table: [(&str, &str); 12] = [
        ("twitter", "tw"),
        ("livejournal", "lj"),
        ("orkut", "or"),
        ("wiki-talk", "wt"),
        ("pokec", "pk"),
        ("youtube", "yt"),
        ("dblp", "db"),
        ("slashdot", "sd"),
        ("roadnet-ca", "rd"),
        ("berkstan", "bk"),
        ("rmat-24-16", "r24"),
        ("rmat-21-86", "r21"),
    ];
    if let Some((short, _)) = DEFAULT_ROOTS.iter().find(|(s, _)| *s == lower) {
        return Some(short);
    }
    table
        .iter()
        .find(|(pat, _)| lower.contains(pat))
        .map(|(_, short)| *short)
}

/// Default root for a graph: the published root for known benchmark graphs,
/// otherwise dense vertex 0.
pub fn default_root(g: &Graph) -> u32 {
    short_name(&g.name)
        .and_then(|s| DEFAULT_ROOTS.iter().find(|(k, _)| *k == s))
        .and_then(|(_, r)| g.resolve_vertex(*r).ok())
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_edge_path() {
        let f = write_tmp("0 1\n1 2\n");
        let g = load_edge_list(f.path(), false, true).unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.original_edge_count(), 2);
    }

    #[test]
    fn comments_and_relabeling() {
        let f = write_tmp("# header\n10 20\n20 10\n% other\n20 30\n");
        let g = load_edge_list(f.path(), false, true).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges()[2], Edge::new(1, 2));
        assert_eq!(g.resolve_vertex(30).unwrap(), 2);
        assert_eq!(g.label(1), 20);
        assert!(g.resolve_vertex(5).is_err());
    }

    #[test]
    fn undirected_stores_both_directions() {
        let f = write_tmp("0 1\n1 2\n");
        let g = load_edge_list(f.path(), false, false).unwrap();
        assert_eq!(g.m(), 4);
        assert_eq!(g.original_edge_count(), 2);
        assert_eq!(g.in_degrees(), g.out_degrees());
    }

    #[test]
    fn empty_file_is_error() {
        let f = write_tmp("# nothing\n");
        assert!(matches!(
            load_edge_list(f.path(), false, true),
            Err(Error::NoEdges(_))
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_tmp("0 1\n1 x\n");
        match load_edge_list(f.path(), false, true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_weight_is_error() {
        let f = write_tmp("0 1 5\n1 2\n");
        match load_edge_list(f.path(), true, true) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("weight"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = load_edge_list(write_tmp("0 1 5\n1 2 7\n").path(), true, true).unwrap();
        assert_eq!(g.weights().unwrap(), &[5, 7]);
    }

    #[test]
    fn rmat_is_deterministic_and_exact() {
        let a = generate_rmat(3, 2, 7).unwrap();
        let b = generate_rmat(3, 2, 7).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!((a.n(), a.m()), (8, 16));
        let c = generate_rmat(3, 2, 8).unwrap();
        assert_ne!(a.edges(), c.edges());
        assert!(generate_rmat(40, 16, 1).is_err());
    }

    #[test]
    fn cycle_stats_flag_uniform() {
        let edges = (0..4).map(|v| Edge::new(v, (v + 1) % 4)).collect();
        let g = Graph::from_edges("cycle", 4, edges, None, true).unwrap();
        let s = stats(&g).unwrap();
        assert_eq!(s.avg_degree, 1.0);
        assert!(s.uniform_degrees);
        assert_eq!(s.skewness, 0.0);
    }

    #[test]
    fn star_skewness_by_hand() {
        // Degrees: one vertex with 8, eight with 0. mean = 8/9.
        // Deviations: 64/9 once and -8/9 eight times.
        // var = (64/9)^2/9 + 8*(8/9)^2/9 = (4096 + 512)/729 = 4608/729
        // third moment = ((64/9)^3 + 8*(-8/9)^3)/9 = (262144 - 4096)/6561 = 258048/6561
        // skew = m3 / var^1.5
        let edges = (1..9).map(|v| Edge::new(0, v)).collect();
        let g = Graph::from_edges("star", 9, edges, None, true).unwrap();
        let s = stats(&g).unwrap();
        let var: f64 = 4608.0 / 729.0;
        let m3: f64 = 258048.0 / 6561.0;
        let expected = m3 / var.powf(1.5);
        assert!((s.avg_degree - 8.0 / 9.0).abs() < 1e-12);
        assert!(
            (s.skewness - expected).abs() < 1e-12,
            "{} vs {expected}",
            s.skewness
        );
        assert!((expected - 2.4748737341529163).abs() < 1e-12);
        assert_eq!(s.degree_histogram[&0], 8);
        assert_eq!(s.diameter_estimate, Some(2));
    }

    #[test]
    fn binary_cache_round_trip() {
        let f = write_tmp("5 7 3\n7 9 4\n9 5 1\n");
        let g = load_edge_list(f.path(), true, false).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        g.save_binary(out.path()).unwrap();
        let h = Graph::load_binary(out.path()).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn default_roots_resolve_known_names() {
        assert_eq!(short_name("soc-Slashdot0902"), Some("sd"));
        assert_eq!(short_name("com-dblp.ungraph"), Some("db"));
        assert_eq!(short_name("rmat-21-86"), Some("r21"));
        assert_eq!(short_name("path"), None);
    }

    #[test]
    fn csr_views() {
        let edges = vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)];
        let g = Graph::from_edges("t", 3, edges, None, true).unwrap();
        let out = g.out_csr();
        assert_eq!(out.offsets, vec![0, 2, 3, 3]);
        assert_eq!(out.neighbors, vec![1, 2, 2]);
        let inv = g.in_csr();
        assert_eq!(inv.offsets, vec![0, 0, 1, 3]);
        assert_eq!(inv.neighbors, vec![0, 1, 0]);
        assert_eq!(inv.edge_ids, vec![0, 1, 2]);
    }
}
