//! Request trace dump and replay.

use std::io::{BufRead, Write};

use super::config::DramConfig;
use super::controller::{run_arrivals, Dram, DramRequest, Kind, RowClass};
use super::stats::DramStats;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "cycle,channel,kind,address,classification";

/// One request as it arrived at the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    /// DRAM cycle of arrival.
    pub cycle: u64,
    pub channel: usize,
    pub kind: Kind,
    pub address: u64,
    pub class: Option<RowClass>,
}

pub fn write_trace(entries: &[TraceEntry], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for e in entries {
        let class = e.class.map_or(String::new(), |c| c.to_string());
        writeln!(
            out,
            "{},{},{},{:#x},{}",
            e.cycle, e.channel, e.kind, e.address, class
        )?;
    }
    Ok(())
}

pub fn read_trace(input: impl BufRead, origin: &str) -> Result<Vec<TraceEntry>> {
    let mut entries = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim();
        if line.is_empty() || (i == 0 && line == TRACE_HEADER) {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: origin.into(),
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 fields, found {}", f.len())));
        }
        let address = f[3]
            .strip_prefix("0x")
            .map_or_else(|| f[3].parse::<u64>(), |h| u64::from_str_radix(h, 16))
            .map_err(|_| bad(format!("bad address {:?}", f[3])))?;
        entries.push(TraceEntry {
            cycle: f[0]
                .parse()
                .map_err(|_| bad(format!("bad cycle {:?}", f[0])))?,
            channel: f[1]
                .parse()
                .map_err(|_| bad(format!("bad channel {:?}", f[1])))?,
            kind: f[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            address,
            class: if f[4].is_empty() {
                None
            } else {
                Some(f[4].parse().map_err(|e: Error| bad(e.to_string()))?)
            },
        });
    }
    Ok(entries)
}

/// Result of feeding a trace through a fresh controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub channel_stats: Vec<DramStats>,
    pub stats: DramStats,
    pub last_completion: u64,
    pub elapsed_ns: f64,
}

/// Replays a trace; the channel count is widened to cover every entry.
pub fn replay(entries: &[TraceEntry], config: DramConfig) -> Result<ReplayOutcome> {
    let channels = entries
        .iter()
        .map(|e| e.channel + 1)
        .max()
        .unwrap_or(1)
        .max(config.channels);
    let mut dram = Dram::new(config.with_channels(channels));
    let arrivals: Vec<(u64, DramRequest)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            (
                e.cycle,
                DramRequest {
                    id: i as u64,
                    kind: e.kind,
                    channel: e.channel,
                    address: e.address,
                },
            )
        })
        .collect();
    run_arrivals(&mut dram, &arrivals)?;
    Ok(ReplayOutcome {
        channel_stats: dram.channel_stats(),
        stats: dram.stats(),
        last_completion: dram.last_completion(),
        elapsed_ns: dram.elapsed_ns(),
    })
}
