//! Models of four graph-processing accelerators built from the flow
//! abstractions over their partition layouts.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::algorithms::{Problem, ProblemSpec, VertexValues};
use crate::dram::{Dram, DramConfig, DramStats, TraceEntry};
use crate::error::{Error, Result};
use crate::flow::{self, Accounting, EngineOptions, Model, SimClock};
use crate::graph::Graph;

mod accugraph;
mod common;
mod foregraph;
mod hitgraph;
mod thundergp;

pub use common::IterationLog;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Accelerator {
    AccuGraph,
    ForeGraph,
    HitGraph,
    ThunderGP,
}

impl Accelerator {
    pub const ALL: [Accelerator; 4] = [
        Accelerator::AccuGraph,
        Accelerator::ForeGraph,
        Accelerator::HitGraph,
        Accelerator::ThunderGP,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Accelerator::AccuGraph => "AccuGraph",
            Accelerator::ForeGraph => "ForeGraph",
            Accelerator::HitGraph => "HitGraph",
            Accelerator::ThunderGP => "ThunderGP",
        }
    }

    pub fn default_clock_mhz(self) -> f64 {
        match self {
            Accelerator::ThunderGP => 250.0,
            _ => 200.0,
        }
    }

    /// Whether updates become visible within the same pass.
    pub fn is_immediate(self) -> bool {
        matches!(self, Accelerator::AccuGraph | Accelerator::ForeGraph)
    }

    pub fn supports(self, problem: Problem) -> bool {
        match problem {
            Problem::Bfs | Problem::Pr | Problem::Wcc => true,
            Problem::Sssp | Problem::Spmv => {
                matches!(self, Accelerator::HitGraph | Accelerator::ThunderGP)
            }
        }
    }

    pub fn multi_channel(self) -> bool {
        matches!(self, Accelerator::HitGraph | Accelerator::ThunderGP)
    }

    pub fn optimizations(self) -> &'static [Opt] {
        match self {
            Accelerator::AccuGraph => &[Opt::PrefetchSkip, Opt::PartitionSkip],
            Accelerator::ForeGraph => &[Opt::ShardSkip, Opt::EdgeShuffle, Opt::StrideMap],
            Accelerator::HitGraph => &[
                Opt::PartitionSkip,
                Opt::DstSort,
                Opt::UpdateCombine,
                Opt::UpdateFilter,
            ],
            Accelerator::ThunderGP => &[Opt::ChunkSchedule],
        }
    }
}

impl fmt::Display for Accelerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Accelerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Accelerator::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown accelerator {s:?}")))
    }
}

/// Optimization switches; each belongs to one accelerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opt {
    PrefetchSkip,
    PartitionSkip,
    ShardSkip,
    EdgeShuffle,
    StrideMap,
    DstSort,
    UpdateCombine,
    UpdateFilter,
    ChunkSchedule,
}

impl Opt {
    pub const ALL: [Opt; 9] = [
        Opt::PrefetchSkip,
        Opt::PartitionSkip,
        Opt::ShardSkip,
        Opt::EdgeShuffle,
        Opt::StrideMap,
        Opt::DstSort,
        Opt::UpdateCombine,
        Opt::UpdateFilter,
        Opt::ChunkSchedule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Opt::PrefetchSkip => "prefetch_skip",
            Opt::PartitionSkip => "partition_skip",
            Opt::ShardSkip => "shard_skip",
            Opt::EdgeShuffle => "edge_shuffle",
            Opt::StrideMap => "stride_map",
            Opt::DstSort => "dst_sort",
            Opt::UpdateCombine => "update_combine",
            Opt::UpdateFilter => "update_filter",
            Opt::ChunkSchedule => "chunk_schedule",
        }
    }
}

impl FromStr for Opt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Opt::ALL
            .into_iter()
            .find(|o| o.name() == key)
            .ok_or_else(|| Error::Unsupported(format!("unknown optimization {s:?}")))
    }
}

/// A set of enabled optimizations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Optimizations(BTreeSet<Opt>);

impl Optimizations {
    pub fn none() -> Optimizations {
        Optimizations::default()
    }

    pub fn all_for(accel: Accelerator) -> Optimizations {
        Optimizations(accel.optimizations().iter().copied().collect())
    }

    pub fn only(opts: &[Opt]) -> Optimizations {
        Optimizations(opts.iter().copied().collect())
    }

    /// Parses `all`, `none`, or a comma-separated list of flags owned by
    /// `accel`.
    pub fn parse(spec: &str, accel: Accelerator) -> Result<Optimizations> {
        match spec.trim() {
            "all" => Ok(Optimizations::all_for(accel)),
            "none" | "" => Ok(Optimizations::none()),
            list => {
                let mut set = BTreeSet::new();
                for item in list.split([',', '+']) {
                    let o: Opt = item.parse()?;
                    if !accel.optimizations().contains(&o) {
                        return Err(Error::Unsupported(format!(
                            "{} does not belong to {accel}",
                            o.name()
                        )));
                    }
                    set.insert(o);
                }
                Ok(Optimizations(set))
            }
        }
    }

    pub fn contains(&self, o: Opt) -> bool {
        self.0.contains(&o)
    }

    pub fn with(mut self, o: Opt) -> Optimizations {
        self.0.insert(o);
        self
    }

    pub fn without(mut self, o: Opt) -> Optimizations {
        self.0.remove(&o);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = Opt> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Optimizations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<&str> = self.0.iter().map(|o| o.name()).collect();
        f.write_str(&names.join("+"))
    }
}

/// Everything that selects and parameterizes one simulated run.
#[derive(Debug, Clone)]
pub struct AccelConfig {
    pub accelerator: Accelerator,
    pub problem: ProblemSpec,
    /// Processing elements; multi-channel designs use one per channel.
    pub pes: usize,
    pub channels: usize,
    pub optimizations: Optimizations,
    pub clock_mhz: f64,
    /// On-chip value storage per partition, in bytes.
    pub bram_budget_bytes: u64,
    /// Overrides the vertex interval derived from the on-chip budget.
    pub interval_size: Option<u32>,
    /// Edges materialized per cycle by the CSR pipeline.
    pub pipeline_width: u32,
    /// Entries of the direct-mapped source value buffer.
    pub source_buffer_entries: usize,
    pub dram: DramConfig,
    pub trace: bool,
    pub engine: EngineOptions,
}

impl AccelConfig {
    pub fn new(accelerator: Accelerator, problem: Problem, dram: DramConfig) -> AccelConfig {
        AccelConfig {
            accelerator,
            problem: ProblemSpec::new(problem),
            pes: match accelerator {
                Accelerator::ForeGraph => 4,
                _ => 1,
            },
            channels: 1,
            optimizations: Optimizations::all_for(accelerator),
            clock_mhz: accelerator.default_clock_mhz(),
            bram_budget_bytes: match accelerator {
                Accelerator::AccuGraph => 4_096_000,
                Accelerator::ForeGraph => 262_144,
                _ => 1 << 20,
            },
            interval_size: None,
            pipeline_width: 8,
            source_buffer_entries: 1 << 16,
            dram,
            trace: false,
            engine: EngineOptions::default(),
        }
    }

    /// Sets the channel count; multi-channel designs get one PE per channel.
    pub fn with_channels(mut self, channels: usize) -> AccelConfig {
        self.channels = channels;
        if self.accelerator.multi_channel() {
            self.pes = channels;
        }
        self
    }

    pub fn with_optimizations(mut self, opts: Optimizations) -> AccelConfig {
        self.optimizations = opts;
        self
    }

    pub fn with_interval(mut self, interval: u32) -> AccelConfig {
        self.interval_size = Some(interval);
        self
    }

    pub fn with_pes(mut self, pes: usize) -> AccelConfig {
        self.pes = pes;
        self
    }

    pub fn opt(&self, o: Opt) -> bool {
        self.optimizations.contains(o)
    }

    /// Vertices per on-chip partition before any per-design splitting.
    pub fn base_interval(&self) -> u32 {
        self.interval_size
            .unwrap_or((self.bram_budget_bytes / 4).clamp(1, u32::MAX as u64) as u32)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.accelerator;
        if !a.supports(self.problem.problem) {
            return Err(Error::Unsupported(format!(
                "{a} does not support {}",
                self.problem.problem
            )));
        }
        if self.channels == 0 || self.pes == 0 {
            return Err(Error::Unsupported(
                "channels and PEs must be positive".into(),
            ));
        }
        if !a.multi_channel() && self.channels != 1 {
            return Err(Error::Unsupported(format!(
                "{a} runs on a single channel only"
            )));
        }
        if a.multi_channel() && self.pes != self.channels {
            return Err(Error::Unsupported(format!(
                "{a} uses one PE per channel ({} PEs for {} channels)",
                self.pes, self.channels
            )));
        }
        for o in self.optimizations.iter() {
            if !a.optimizations().contains(&o) {
                return Err(Error::Unsupported(format!(
                    "{} does not belong to {a}",
                    o.name()
                )));
            }
        }
        if self.pipeline_width == 0 || self.source_buffer_entries == 0 {
            return Err(Error::Unsupported(
                "pipeline width and buffer size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub accelerator: Accelerator,
    pub problem: Problem,
    pub graph: String,
    pub vertices: usize,
    pub dram: String,
    pub channels: usize,
    pub optimizations: Optimizations,
    pub elapsed_ns: f64,
    pub iterations: u32,
    pub edges_read_total: u64,
    pub edges_read_per_iteration: Vec<u64>,
    pub values_read_per_iteration: Vec<u64>,
    pub updates_written: u64,
    pub original_edge_count: u64,
    pub accounting: Accounting,
    pub dram_stats: Vec<DramStats>,
    pub dram_cycles: u64,
    pub utilization: f64,
    /// Bytes occupied per channel by the layout's regions.
    pub footprint: Vec<u64>,
    pub final_values: VertexValues,
    pub trace: Option<Vec<TraceEntry>>,
}

impl RunResult {
    pub fn elapsed_seconds(&self) -> f64 {
        self.elapsed_ns * 1e-9
    }

    pub fn mteps(&self) -> f64 {
        self.original_edge_count as f64 / self.elapsed_seconds() / 1e6
    }

    pub fn mreps(&self) -> f64 {
        self.edges_read_total as f64 / self.elapsed_seconds() / 1e6
    }

    /// Requested line bytes per input edge.
    pub fn bytes_per_edge(&self) -> f64 {
        self.accounting.line_bytes() as f64 / self.original_edge_count.max(1) as f64
    }

    pub fn total_dram_stats(&self) -> DramStats {
        let mut s = DramStats::default();
        for c in &self.dram_stats {
            s.merge(c);
        }
        s
    }

    pub fn total_requests(&self) -> u64 {
        self.accounting.requests()
    }
}

/// What a model reports back besides the engine's counters.
pub(crate) struct ModelReport {
    pub iterations: u32,
    pub log: IterationLog,
    pub updates_written: u64,
    pub footprint: Vec<u64>,
    pub final_values: Vec<f64>,
}

pub(crate) trait Finish: Model {
    fn report(self: Box<Self>) -> ModelReport;
}

/// Simulates `cfg` on `g` starting from `root` (a dense vertex id).
pub fn run(g: &Graph, root: u32, cfg: &AccelConfig) -> Result<RunResult> {
    cfg.validate()?;
    let problem = cfg.problem.problem;
    if problem.needs_root() && root as usize >= g.n() {
        return Err(Error::VertexOutOfRange {
            vertex: root as u64,
            n: g.n(),
        });
    }
    if g.n() == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let weighted;
    let g = if problem.is_weighted() && !g.is_weighted() {
        weighted = g.clone().with_random_weights(0x5eed);
        &weighted
    } else {
        g
    };
    let dram_cfg = cfg.dram.clone().with_channels(cfg.channels);
    let mut dram = Dram::new(dram_cfg.clone());
    if cfg.trace {
        dram = dram.with_trace();
    }
    let mut model: Box<dyn Finish> = match cfg.accelerator {
        Accelerator::AccuGraph => Box::new(accugraph::AccuGraph::new(g, root, cfg)?),
        Accelerator::ForeGraph => Box::new(foregraph::ForeGraph::new(g, root, cfg)?),
        Accelerator::HitGraph => Box::new(hitgraph::HitGraph::new(g, root, cfg)?),
        Accelerator::ThunderGP => Box::new(thundergp::ThunderGP::new(g, root, cfg)?),
    };
    let clock = SimClock::new(cfg.clock_mhz, dram_cfg.tck_ns)?;
    let outcome = flow::run(model.as_mut(), &mut dram, clock, cfg.engine)?;
    let report = model.report();
    let dram_stats = dram.channel_stats();
    let mut total = DramStats::default();
    dram_stats.iter().for_each(|s| total.merge(s));
    let utilization = total.utilization(&dram_cfg, cfg.channels, dram.last_completion());
    Ok(RunResult {
        accelerator: cfg.accelerator,
        problem,
        graph: g.name.clone(),
        vertices: g.n(),
        dram: dram_cfg.name.clone(),
        channels: cfg.channels,
        optimizations: cfg.optimizations.clone(),
        elapsed_ns: outcome.elapsed_ns,
        iterations: report.iterations,
        edges_read_total: report.log.edges.iter().sum(),
        edges_read_per_iteration: report.log.edges,
        values_read_per_iteration: report.log.values,
        updates_written: report.updates_written,
        original_edge_count: g.original_edge_count(),
        accounting: outcome.accounting,
        dram_stats,
        dram_cycles: dram.last_completion(),
        utilization,
        footprint: report.footprint,
        final_values: VertexValues(report.final_values),
        trace: dram.take_trace(),
    })
}
