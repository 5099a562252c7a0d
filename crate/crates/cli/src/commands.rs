//! Single-run, replay and summary subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use graphsim::accel::{run, AccelConfig, Accelerator, Optimizations};
use graphsim::dram::{read_trace, replay, write_trace, DramConfig};
use graphsim::metrics::{append_csv, compute_metrics, csv_header, read_csv, summary, MetricRow};
use graphsim::Problem;

use crate::failure::{CmdResult, Failure};
use crate::graphs::GraphSpec;

/// Everything that selects one simulation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub accelerator: Accelerator,
    pub problem: Problem,
    pub dram: DramConfig,
    pub channels: usize,
    pub optimizations: Optimizations,
    pub interval: Option<u32>,
}

impl RunSpec {
    pub fn parse(
        accel: &str,
        problem: &str,
        dram: &str,
        channels: usize,
        opts: &str,
    ) -> CmdResult<RunSpec> {
        let accelerator: Accelerator = accel.parse()?;
        let problem: Problem = problem.parse()?;
        if !accelerator.supports(problem) {
            return Err(Failure::usage(format!(
                "{accelerator} does not support {problem}"
            )));
        }
        Ok(RunSpec {
            accelerator,
            problem,
            dram: DramConfig::load(dram)?,
            channels,
            optimizations: Optimizations::parse(opts, accelerator)?,
            interval: None,
        })
    }

    pub fn config(&self) -> AccelConfig {
        let mut cfg = AccelConfig::new(self.accelerator, self.problem, self.dram.clone())
            .with_channels(self.channels)
            .with_optimizations(self.optimizations.clone());
        if let Some(i) = self.interval {
            cfg = cfg.with_interval(i);
        }
        cfg
    }

    /// CSV key columns of the row this spec produces on graph `graph`.
    pub fn key(&self, graph: &str) -> String {
        [
            self.accelerator.to_string(),
            self.problem.to_string(),
            graph.to_string(),
            self.dram.name.clone(),
            self.channels.to_string(),
            self.optimizations.to_string(),
        ]
        .join(",")
    }
}

pub struct SimulateArgs {
    pub run: RunSpec,
    pub graph: GraphSpec,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub values: Option<PathBuf>,
}

pub fn simulate(args: SimulateArgs, stdout: &mut impl Write) -> CmdResult {
    let g = args.graph.load(Path::new(""))?;
    let root = args.graph.root(&g)?;
    let mut cfg = args.run.config();
    cfg.trace = args.trace.is_some();
    cfg.validate()?;
    let result = run(&g, root, &cfg)?;
    let row = compute_metrics(&result)?;
    if let (Some(path), Some(trace)) = (&args.trace, &result.trace) {
        let f =
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace(trace, std::io::BufWriter::new(f))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.values {
        let mut text = String::from("vertex,value\n");
        for (v, x) in result.final_values.as_slice().iter().enumerate() {
            text.push_str(&format!("{},{x}\n", g.label(v as u32)));
        }
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(out) = &args.out {
        append_csv(std::slice::from_ref(&row), out)?;
    }
    print_rows(stdout, &[row])?;
    Ok(())
}

pub fn print_rows(stdout: &mut impl Write, rows: &[MetricRow]) -> CmdResult {
    let mut text = csv_header();
    text.push('\n');
    for r in rows {
        text.push_str(&r.to_csv_line());
        text.push('\n');
    }
    stdout
        .write_all(text.as_bytes())
        .context("writing output")?;
    Ok(())
}

pub fn replay_trace(trace: &Path, dram: &str, stdout: &mut impl Write) -> CmdResult {
    let dram = DramConfig::load(dram)?;
    let f = std::fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
    let entries = read_trace(std::io::BufReader::new(f), &trace.display().to_string())?;
    let out = replay(&entries, dram)?;
    let mut text = String::from(
        "channel,requests,reads,writes,row_hits,row_misses,row_conflicts,mean_latency_cycles\n",
    );
    let mut line = |name: String, s: &graphsim::dram::DramStats| {
        text.push_str(&format!(
            "{name},{},{},{},{},{},{},{:.3}\n",
            s.requests(),
            s.reads,
            s.writes,
            s.row_hits,
            s.row_misses,
            s.row_conflicts,
            s.mean_latency()
        ));
    };
    for (c, s) in out.channel_stats.iter().enumerate() {
        line(c.to_string(), s);
    }
    line("total".into(), &out.stats);
    text.push_str(&format!(
        "# last completion cycle {}, elapsed {:.3} ns\n",
        out.last_completion, out.elapsed_ns
    ));
    stdout
        .write_all(text.as_bytes())
        .context("writing output")?;
    Ok(())
}

pub fn summarize(csv: &Path, stdout: &mut impl Write) -> CmdResult {
    let rows = read_csv(csv)?;
    stdout
        .write_all(summary(&rows).as_bytes())
        .context("writing output")?;
    Ok(())
}
