//! `graphsim`: simulate graph accelerators against a DRAM model, run
//! parameter sweeps, and replay request traces.

mod commands;
mod failure;
mod graphs;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{RunSpec, SimulateArgs};
use failure::{CmdResult, Failure};
use graphs::GraphSpec;

#[derive(Debug, Parser)]
#[command(
    name = "graphsim",
    version,
    about = "Memory-access simulator for FPGA graph accelerators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and print its metric row as CSV.
    Simulate {
        /// AccuGraph, ForeGraph, HitGraph or ThunderGP.
        #[arg(long)]
        accel: String,
        /// BFS, PR, WCC, SSSP or SpMV.
        #[arg(long)]
        problem: String,
        /// Edge-list path, binary cache (.bin) or rmat:scale:degree[:seed].
        #[arg(long)]
        graph: String,
        /// Root vertex in the file's numbering.
        #[arg(long)]
        root: Option<u64>,
        /// DRAM preset (ddr3, ddr4, hbm, ...) or configuration file.
        #[arg(long, default_value = "ddr4")]
        dram: String,
        #[arg(long, default_value_t = 1)]
        channels: usize,
        /// `all`, `none` or a list such as `partition_skip,update_filter`.
        #[arg(long, default_value = "all")]
        opt: String,
        /// Vertex interval override.
        #[arg(long)]
        interval: Option<u32>,
        /// Read the edge list as undirected.
        #[arg(long)]
        undirected: bool,
        /// Read a third column of edge weights.
        #[arg(long)]
        weighted: bool,
        /// Append the metric row to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dump the DRAM request trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write final vertex values (`vertex,value`) to this file.
        #[arg(long)]
        values: Option<PathBuf>,
    },
    /// Run the cartesian product described by a TOML sweep file.
    Sweep {
        config: PathBuf,
        /// Output CSV, overriding the file's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a request trace through a fresh DRAM model.
    Replay {
        trace: PathBuf,
        #[arg(long, default_value = "ddr4")]
        dram: String,
    },
    /// Print grouped tables and speedups for a result CSV.
    Summary { csv: PathBuf },
}

fn execute(command: Command) -> CmdResult {
    let mut stdout = std::io::stdout().lock();
    match command {
        Command::Simulate {
            accel,
            problem,
            graph,
            root,
            dram,
            channels,
            opt,
            interval,
            undirected,
            weighted,
            out,
            trace,
            values,
        } => {
            if channels == 0 {
                return Err(Failure::usage("--channels must be positive"));
            }
            let mut run = RunSpec::parse(&accel, &problem, &dram, channels, &opt)?;
            run.interval = interval;
            let graph = GraphSpec {
                source: graph,
                undirected,
                weighted,
                root,
            };
            commands::simulate(
                SimulateArgs {
                    run,
                    graph,
                    out,
                    trace,
                    values,
                },
                &mut stdout,
            )
        }
        Command::Sweep { config, out } => sweep::sweep(&config, out, &mut stdout).map(|_| ()),
        Command::Replay { trace, dram } => commands::replay_trace(&trace, &dram, &mut stdout),
        Command::Summary { csv } => commands::summarize(&csv, &mut stdout),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
