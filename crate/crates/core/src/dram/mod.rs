//! Cycle-level DRAM timing model: open-row banks, FR-FCFS scheduling, data
//! bus serialization and row-buffer statistics.

mod config;
mod controller;
mod stats;
mod trace;

pub use config::{DramConfig, Location, Standard, Timings, LINE_BYTES};
pub use controller::{
    run_arrivals, Completion, Dram, DramRequest, Kind, RowClass, SCHEDULING_WINDOW,
};
pub use stats::DramStats;
pub use trace::{read_trace, replay, write_trace, ReplayOutcome, TraceEntry, TRACE_HEADER};
