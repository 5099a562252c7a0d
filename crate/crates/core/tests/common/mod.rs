//! Graph corpus and helpers shared by the integration tests.

#![allow(dead_code)]

use graphsim::accel::{run, AccelConfig, Accelerator, RunResult};
use graphsim::dram::DramConfig;
use graphsim::graph::{generate_rmat, Edge, Graph};
use graphsim::Problem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A corpus entry with the root used for rooted problems.
pub struct Case {
    pub graph: Graph,
    pub root: u32,
}

fn graph(name: &str, n: usize, pairs: &[(u32, u32)], directed: bool) -> Graph {
    let edges = pairs.iter().map(|&(s, d)| Edge::new(s, d)).collect();
    Graph::from_edges(name, n, edges, None, directed).unwrap()
}

pub fn path(n: u32) -> Graph {
    let pairs: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    graph(&format!("path-{n}"), n as usize, &pairs, true)
}

/// Directed star with every leaf pointing at vertex 0.
pub fn in_star(leaves: u32) -> Graph {
    let pairs: Vec<_> = (1..=leaves).map(|i| (i, 0)).collect();
    graph(
        &format!("in-star-{leaves}"),
        leaves as usize + 1,
        &pairs,
        true,
    )
}

pub fn out_star(leaves: u32) -> Graph {
    let pairs: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
    graph(
        &format!("out-star-{leaves}"),
        leaves as usize + 1,
        &pairs,
        true,
    )
}

pub fn clique(n: u32) -> Graph {
    let pairs: Vec<_> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    graph(&format!("clique-{n}"), n as usize, &pairs, true)
}

fn random_sparse(n: u32, m: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<_> = (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    graph(&format!("random-{n}-{m}"), n as usize, &pairs, true)
}

/// Vertex with the largest out-degree; lowest id on ties.
pub fn hub(g: &Graph) -> u32 {
    let deg = g.out_degrees();
    (0..g.n() as u32)
        .max_by_key(|&v| (deg[v as usize], std::cmp::Reverse(v)))
        .unwrap_or(0)
}

pub fn rmat(scale: u32, degree: u32) -> Graph {
    generate_rmat(scale, degree, 1).unwrap()
}

/// Small hand-built graphs (at most 64 vertices) plus R-MAT graphs of
/// scale 10 to 14.
pub fn corpus() -> Vec<Case> {
    let mut out = small_corpus();
    for (scale, degree) in [(10, 8), (12, 16), (14, 16)] {
        let g = rmat(scale, degree);
        out.push(Case {
            root: hub(&g),
            graph: g,
        });
    }
    out
}

pub fn small_corpus() -> Vec<Case> {
    let two_cliques = {
        let mut pairs = Vec::new();
        for (base, size) in [(0u32, 5u32), (5, 6)] {
            for a in 0..size {
                for b in a + 1..size {
                    pairs.push((base + a, base + b));
                }
            }
        }
        graph("two-cliques", 11, &pairs, false)
    };
    let scattered = graph(
        "scattered",
        40,
        &[
            (0, 1),
            (1, 2),
            (5, 6),
            (6, 5),
            (10, 20),
            (20, 30),
            (30, 39),
            (3, 0),
            (25, 24),
        ],
        true,
    );
    let cycle = {
        let pairs: Vec<_> = (0..33).map(|i| (i, (i + 1) % 33)).collect();
        graph("cycle-33", 33, &pairs, true)
    };
    let tree = {
        let pairs: Vec<_> = (1..63).map(|i| ((i - 1) / 2, i)).collect();
        graph("tree-63", 63, &pairs, true)
    };
    let grid = {
        let mut pairs = Vec::new();
        for r in 0..8u32 {
            for c in 0..8u32 {
                let v = r * 8 + c;
                if c + 1 < 8 {
                    pairs.push((v, v + 1));
                }
                if r + 1 < 8 {
                    pairs.push((v, v + 8));
                }
            }
        }
        graph("grid-8x8", 64, &pairs, false)
    };
    let undirected_path = {
        let pairs: Vec<_> = (0..15).map(|i| (i, i + 1)).collect();
        graph("upath-16", 16, &pairs, false)
    };
    vec![
        Case {
            graph: path(64),
            root: 0,
        },
        Case {
            graph: undirected_path,
            root: 7,
        },
        Case {
            graph: out_star(63),
            root: 0,
        },
        Case {
            graph: in_star(63),
            root: 5,
        },
        Case {
            graph: clique(8),
            root: 3,
        },
        Case {
            graph: two_cliques,
            root: 6,
        },
        Case {
            graph: scattered,
            root: 10,
        },
        Case {
            graph: cycle,
            root: 4,
        },
        Case {
            graph: tree,
            root: 0,
        },
        Case {
            graph: grid,
            root: 27,
        },
        Case {
            graph: random_sparse(64, 160, 7),
            root: 0,
        },
    ]
}

pub fn config(accel: Accelerator, problem: Problem) -> AccelConfig {
    AccelConfig::new(accel, problem, DramConfig::ddr4())
}

pub fn simulate(g: &Graph, root: u32, cfg: &AccelConfig) -> RunResult {
    run(g, root, cfg).unwrap_or_else(|e| {
        panic!(
            "{} {} on {}: {e}",
            cfg.accelerator, cfg.problem.problem, g.name
        )
    })
}

/// Dense matrix-vector oracle for one PR or SpMV pass.
pub fn dense_pass(g: &Graph, problem: Problem, damping: f64) -> Vec<f64> {
    let n = g.n();
    let out_deg = g.out_degrees();
    let mut a = vec![0.0f64; n * n];
    for (i, e) in g.edges().iter().enumerate() {
        let coef = match problem {
            Problem::Pr => 1.0 / out_deg[e.src as usize] as f64,
            _ => g.weight(i) as f64,
        };
        a[e.dst as usize * n + e.src as usize] += coef;
    }
    let x: Vec<f64> = match problem {
        Problem::Pr => vec![1.0 / n as f64; n],
        _ => vec![1.0; n],
    };
    (0..n)
        .map(|v| {
            let dot: f64 = (0..n).map(|u| a[v * n + u] * x[u]).sum();
            match problem {
                Problem::Pr => (1.0 - damping) / n as f64 + damping * dot,
                _ => dot,
            }
        })
        .collect()
}

pub fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            let scale = x.abs().max(y.abs());
            (x - y).abs() <= rel * scale || (x - y).abs() < 1e-300
        })
}
