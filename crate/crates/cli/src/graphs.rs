//! Graph selection from command-line specs.

use std::path::Path;

use graphsim::graph::{default_root, generate_rmat, load_edge_list};
use graphsim::Graph;

use crate::failure::{CmdResult, Failure};

/// Where a graph comes from and how to read it.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSpec {
    pub source: String,
    pub undirected: bool,
    pub weighted: bool,
    /// Root in the source numbering.
    pub root: Option<u64>,
}

impl GraphSpec {
    pub fn new(source: impl Into<String>) -> GraphSpec {
        GraphSpec {
            source: source.into(),
            undirected: false,
            weighted: false,
            root: None,
        }
    }

    /// Loads `rmat:scale:degree[:seed]`, a binary cache (`.bin`) or an edge
    /// list. Relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> CmdResult<Graph> {
        if let Some(rest) = self.source.strip_prefix("rmat:") {
            return rmat(rest);
        }
        let path = base.join(&self.source);
        let g = if path.extension().is_some_and(|e| e == "bin") {
            Graph::load_binary(&path)?
        } else {
            load_edge_list(&path, self.weighted, !self.undirected)?
        };
        Ok(g)
    }

    /// Dense root id: the requested vertex or the graph's default.
    pub fn root(&self, g: &Graph) -> CmdResult<u32> {
        match self.root {
            Some(r) => g
                .resolve_vertex(r)
                .map_err(|e| Failure::usage(format!("--root {r}: {e}"))),
            None => Ok(default_root(g)),
        }
    }
}

fn rmat(spec: &str) -> CmdResult<Graph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || {
        Failure::usage(format!(
            "expected rmat:scale:degree[:seed], got rmat:{spec}"
        ))
    };
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let scale: u32 = parts[0].parse().map_err(|_| bad())?;
    let degree: u32 = parts[1].parse().map_err(|_| bad())?;
    let seed: u64 = match parts.get(2) {
        Some(s) => s.parse().map_err(|_| bad())?,
        None => 1,
    };
    let mut g = generate_rmat(scale, degree, seed).map_err(|e| Failure::usage(e.to_string()))?;
    g.name = format!("rmat-{scale}-{degree}-s{seed}");
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmat_specs() {
        let g = GraphSpec::new("rmat:4:2:9").load(Path::new(".")).unwrap();
        assert_eq!((g.n(), g.m(), g.name.as_str()), (16, 32, "rmat-4-2-s9"));
        assert!(GraphSpec::new("rmat:4").load(Path::new(".")).is_err());
        assert!(GraphSpec::new("rmat:x:2").load(Path::new(".")).is_err());
    }

    #[test]
    fn missing_file_is_a_run_error() {
        let e = GraphSpec::new("no/such/file.txt")
            .load(Path::new("."))
            .unwrap_err();
        assert!(matches!(e, Failure::Run(_)));
    }
}
