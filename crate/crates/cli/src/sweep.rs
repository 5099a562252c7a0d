//! Resumable parameter sweeps over the cartesian product of a config file.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use graphsim::accel::{run, Accelerator, Opt, Optimizations};
use graphsim::dram::DramConfig;
use graphsim::metrics::{
    append_csv, compute_metrics, read_csv, read_csv_keys, write_summary, MetricRow,
};
use graphsim::{Graph, Problem};
use rayon::prelude::*;
use serde::Deserialize;

use crate::commands::RunSpec;
use crate::failure::{CmdResult, Failure};
use crate::graphs::GraphSpec;

pub const WORKERS_ENV: &str = "GRAPHSIM_WORKERS";

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphEntry {
    Source(String),
    Detailed {
        path: String,
        #[serde(default)]
        undirected: bool,
        #[serde(default)]
        weighted: bool,
        root: Option<u64>,
    },
}

impl GraphEntry {
    fn spec(&self) -> GraphSpec {
        match self {
            GraphEntry::Source(s) => GraphSpec::new(s.clone()),
            GraphEntry::Detailed {
                path,
                undirected,
                weighted,
                root,
            } => GraphSpec {
                source: path.clone(),
                undirected: *undirected,
                weighted: *weighted,
                root: *root,
            },
        }
    }
}

fn all() -> Vec<String> {
    vec!["all".into()]
}

fn default_problems() -> Vec<String> {
    ["BFS", "PR", "WCC"].map(String::from).to_vec()
}

fn default_drams() -> Vec<String> {
    vec!["ddr4".into()]
}

fn default_channels() -> Vec<usize> {
    vec![1]
}

/// Sweep description; every list-valued key is one axis of the product.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Output CSV, relative to the config file.
    pub out: PathBuf,
    /// Optional plain-text summary of the whole output file.
    pub summary: Option<PathBuf>,
    graphs: Vec<GraphEntry>,
    #[serde(default = "all")]
    accelerators: Vec<String>,
    #[serde(default = "default_problems")]
    problems: Vec<String>,
    #[serde(default = "default_drams")]
    drams: Vec<String>,
    #[serde(default = "default_channels")]
    channels: Vec<usize>,
    #[serde(default = "all")]
    optimizations: Vec<String>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> CmdResult<SweepConfig> {
        toml::from_str(text).map_err(|e| Failure::usage(format!("malformed sweep config: {e}")))
    }

    fn accelerators(&self) -> CmdResult<Vec<Accelerator>> {
        if self
            .accelerators
            .iter()
            .any(|a| a.eq_ignore_ascii_case("all"))
        {
            return Ok(Accelerator::ALL.to_vec());
        }
        Ok(self
            .accelerators
            .iter()
            .map(|a| a.parse())
            .collect::<Result<_, _>>()?)
    }

    fn problems(&self) -> CmdResult<Vec<Problem>> {
        Ok(self
            .problems
            .iter()
            .map(|p| p.parse())
            .collect::<Result<_, _>>()?)
    }

    /// The optimization set `spec` means for `accel`; flags that belong to
    /// other designs are dropped.
    fn optimizations(spec: &str, accel: Accelerator) -> CmdResult<Optimizations> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("all") {
            return Ok(Optimizations::all_for(accel));
        }
        let mut set = Optimizations::none();
        for item in spec.split([',', '+']).map(str::trim) {
            if item.is_empty() || item.eq_ignore_ascii_case("none") {
                continue;
            }
            let o: Opt = item.parse()?;
            if accel.optimizations().contains(&o) {
                set = set.with(o);
            }
        }
        Ok(set)
    }

    /// Runs in deterministic order: graph, accelerator, problem, DRAM,
    /// channels, optimizations. Impossible combinations and duplicates are
    /// left out.
    pub fn plan(&self, graphs: &[Graph]) -> CmdResult<Vec<(usize, RunSpec)>> {
        let accels = self.accelerators()?;
        let problems = self.problems()?;
        let drams: Vec<DramConfig> = self
            .drams
            .iter()
            .map(|d| DramConfig::load(d))
            .collect::<Result<_, _>>()?;
        if self.channels.contains(&0) {
            return Err(Failure::usage("channel counts must be positive"));
        }
        let mut seen = BTreeSet::new();
        let mut plan = Vec::new();
        for (gi, g) in graphs.iter().enumerate() {
            for &accel in &accels {
                for &problem in problems.iter().filter(|&&p| accel.supports(p)) {
                    for dram in &drams {
                        for &channels in &self.channels {
                            if channels > 1 && !accel.multi_channel() {
                                continue;
                            }
                            for opts in &self.optimizations {
                                let spec = RunSpec {
                                    accelerator: accel,
                                    problem,
                                    dram: dram.clone(),
                                    channels,
                                    optimizations: Self::optimizations(opts, accel)?,
                                    interval: None,
                                };
                                if seen.insert(spec.key(&g.name)) {
                                    plan.push((gi, spec));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(plan)
    }
}

fn workers() -> CmdResult<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| Failure::usage(format!("{WORKERS_ENV} must be a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Counts reported by a sweep.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub ran: usize,
    pub skipped: usize,
    pub failed: usize,
}

pub fn sweep(
    config_path: &Path,
    out_override: Option<PathBuf>,
    stdout: &mut impl Write,
) -> CmdResult<SweepReport> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Failure::usage(format!("reading {}: {e}", config_path.display())))?;
    let cfg = SweepConfig::parse(&text)?;
    let base = config_path.parent().unwrap_or(Path::new(""));
    let out = out_override.unwrap_or_else(|| base.join(&cfg.out));

    let specs: Vec<GraphSpec> = cfg.graphs.iter().map(GraphEntry::spec).collect();
    let mut graphs = Vec::with_capacity(specs.len());
    let mut roots = Vec::with_capacity(specs.len());
    for s in &specs {
        let g = s.load(base)?;
        roots.push(s.root(&g)?);
        graphs.push(g);
    }
    let plan = cfg.plan(&graphs)?;
    let done = if out.exists() {
        read_csv_keys(&out)?
    } else {
        BTreeSet::new()
    };
    let pending: Vec<&(usize, RunSpec)> = plan
        .iter()
        .filter(|(gi, spec)| !done.contains(&spec.key(&graphs[*gi].name)))
        .collect();
    let mut report = SweepReport {
        skipped: plan.len() - pending.len(),
        ..SweepReport::default()
    };
    let workers = workers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Run(e.into()))?;
    log::info!(
        "{} runs planned, {} already present, {workers} workers",
        plan.len(),
        report.skipped
    );
    for batch in pending.chunks(workers) {
        let results: Vec<Result<MetricRow, String>> = pool.install(|| {
            batch
                .par_iter()
                .map(|(gi, spec)| {
                    let g = &graphs[*gi];
                    run(g, roots[*gi], &spec.config())
                        .and_then(|r| compute_metrics(&r))
                        .map_err(|e| format!("{}: {e}", spec.key(&g.name)))
                })
                .collect()
        });
        let mut rows = Vec::new();
        for r in results {
            match r {
                Ok(row) => rows.push(row),
                Err(e) => {
                    log::error!("{e}");
                    report.failed += 1;
                }
            }
        }
        report.ran += rows.len();
        append_csv(&rows, &out)?;
    }
    if let Some(summary) = &cfg.summary {
        let rows = if out.exists() {
            read_csv(&out)?
        } else {
            Vec::new()
        };
        write_summary(&rows, base.join(summary))?;
    }
    writeln!(
        stdout,
        "{} runs written to {}, {} already present, {} failed",
        report.ran,
        out.display(),
        report.skipped,
        report.failed
    )
    .map_err(|e| Failure::Run(e.into()))?;
    if report.failed > 0 {
        return Err(Failure::Run(anyhow::anyhow!(
            "{} runs failed",
            report.failed
        )));
    }
    Ok(report)
}
