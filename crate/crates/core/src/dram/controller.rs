//! Command-level open-row controller with FR-FCFS scheduling.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::config::{DramConfig, Timings};
use super::stats::DramStats;
use super::trace::TraceEntry;
use crate::error::{Error, Result};

/// Requests the scheduler looks at per channel, oldest first.
pub const SCHEDULING_WINDOW: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Read,
    Write,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Read => "read",
            Kind::Write => "write",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "read" | "R" => Ok(Kind::Read),
            "write" | "W" => Ok(Kind::Write),
            _ => Err(Error::DramConfig(format!("unknown request kind {s:?}"))),
        }
    }
}

/// Row-buffer outcome of a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowClass {
    Hit,
    Miss,
    Conflict,
}

impl fmt::Display for RowClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowClass::Hit => "hit",
            RowClass::Miss => "miss",
            RowClass::Conflict => "conflict",
        })
    }
}

impl FromStr for RowClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hit" => Ok(RowClass::Hit),
            "miss" => Ok(RowClass::Miss),
            "conflict" => Ok(RowClass::Conflict),
            _ => Err(Error::DramConfig(format!("unknown row class {s:?}"))),
        }
    }
}

/// One 64-byte access as seen by the memory controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DramRequest {
    pub id: u64,
    pub kind: Kind,
    pub channel: usize,
    pub address: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    pub id: u64,
    pub cycle: u64,
    pub class: RowClass,
}

#[derive(Debug, Clone)]
struct Queued {
    id: u64,
    kind: Kind,
    bank: usize,
    group: usize,
    row: u64,
    arrival: u64,
    class: Option<RowClass>,
    trace: Option<usize>,
}

#[derive(Debug, Clone, Default)]
struct Bank {
    open_row: Option<u64>,
    act_ready: u64,
    pre_ready: u64,
    col_ready: u64,
}

#[derive(Debug, Clone)]
struct Channel {
    queue: VecDeque<Queued>,
    banks: Vec<Bank>,
    last_col: Option<(u64, usize)>,
    bus_free: u64,
    inflight: BinaryHeap<Reverse<(u64, u64, u8)>>,
    stats: DramStats,
}

enum Command {
    Column(usize),
    Activate(usize),
    Precharge(usize),
}

/// A multi-channel DRAM. Time advances only through [`Dram::tick`]; cycles
/// in which nothing can happen may be skipped using [`Dram::next_event`].
#[derive(Debug, Clone)]
pub struct Dram {
    config: DramConfig,
    channels: Vec<Channel>,
    last_completion: u64,
    trace: Option<Vec<TraceEntry>>,
}

impl Dram {
    pub fn new(config: DramConfig) -> Dram {
        let channel = Channel {
            queue: VecDeque::new(),
            banks: vec![Bank::default(); config.banks_total()],
            last_col: None,
            bus_free: 0,
            inflight: BinaryHeap::new(),
            stats: DramStats::default(),
        };
        Dram {
            channels: vec![channel; config.channels],
            config,
            last_completion: 0,
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Dram {
        self.trace = Some(Vec::new());
        self
    }

    pub fn config(&self) -> &DramConfig {
        &self.config
    }

    /// Queues a request that arrives at DRAM cycle `cycle`.
    pub fn enqueue(&mut self, req: DramRequest, cycle: u64) -> Result<()> {
        if req.channel >= self.channels.len() {
            return Err(Error::ChannelOutOfRange {
                channel: req.channel,
                channels: self.channels.len(),
            });
        }
        let loc = self.config.decode(req.address)?;
        let trace = self.trace.as_mut().map(|t| {
            t.push(TraceEntry {
                cycle,
                channel: req.channel,
                kind: req.kind,
                address: req.address,
                class: None,
            });
            t.len() - 1
        });
        let group = loc.rank * self.config.bank_groups + loc.bank_group;
        self.channels[req.channel].queue.push_back(Queued {
            id: req.id,
            kind: req.kind,
            bank: self.config.flat_bank(&loc),
            group,
            row: loc.row,
            arrival: cycle,
            class: None,
            trace,
        });
        Ok(())
    }

    /// Processes DRAM cycle `cycle`: at most one command per channel, then
    /// reports every request whose data transfer ends by this cycle.
    pub fn tick(&mut self, cycle: u64, done: &mut Vec<Completion>) {
        let t = self.config.timings;
        let burst = self.config.burst_cycles();
        for ch in &mut self.channels {
            if let Some(cmd) = ch.pick(cycle, &t) {
                match cmd {
                    Command::Column(i) => {
                        let mut r = ch.queue.remove(i).expect("window index");
                        let class = *r.class.get_or_insert(RowClass::Hit);
                        let b = &mut ch.banks[r.bank];
                        let end = cycle + t.cl + burst;
                        b.col_ready = cycle + t.ccd_l;
                        b.pre_ready = b.pre_ready.max(match r.kind {
                            Kind::Read => cycle + t.rtp,
                            Kind::Write => end + t.wr,
                        });
                        ch.bus_free = end;
                        ch.last_col = Some((cycle, r.group));
                        ch.stats.record(r.kind, class, burst, end - r.arrival);
                        ch.inflight.push(Reverse((end, r.id, class as u8)));
                        if let (Some(idx), Some(tr)) = (r.trace.take(), self.trace.as_mut()) {
                            tr[idx].class = Some(class);
                        }
                    }
                    Command::Activate(i) => {
                        let r = &mut ch.queue[i];
                        r.class.get_or_insert(RowClass::Miss);
                        let b = &mut ch.banks[r.bank];
                        b.open_row = Some(r.row);
                        b.col_ready = cycle + t.rcd;
                        b.pre_ready = cycle + t.ras;
                    }
                    Command::Precharge(i) => {
                        let r = &mut ch.queue[i];
                        r.class.get_or_insert(RowClass::Conflict);
                        let b = &mut ch.banks[r.bank];
                        b.open_row = None;
                        b.act_ready = cycle + t.rp;
                    }
                }
            }
            while let Some(&Reverse((end, id, class))) = ch.inflight.peek() {
                if end > cycle {
                    break;
                }
                ch.inflight.pop();
                self.last_completion = self.last_completion.max(end);
                done.push(Completion {
                    id,
                    cycle: end,
                    class: match class {
                        0 => RowClass::Hit,
                        1 => RowClass::Miss,
                        _ => RowClass::Conflict,
                    },
                });
            }
        }
    }

    /// Earliest cycle at which a command could issue or a transfer finish,
    /// assuming no new arrivals. `None` when the DRAM is empty.
    pub fn next_event(&self) -> Option<u64> {
        let t = self.config.timings;
        self.channels
            .iter()
            .filter_map(|ch| {
                let done = ch.inflight.peek().map(|r| r.0 .0);
                let cmd = ch.earliest_command(&t);
                match (done, cmd) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            })
            .min()
    }

    pub fn is_idle(&self) -> bool {
        self.channels
            .iter()
            .all(|c| c.queue.is_empty() && c.inflight.is_empty())
    }

    pub fn outstanding(&self, channel: usize) -> usize {
        let c = &self.channels[channel];
        c.queue.len() + c.inflight.len()
    }

    pub fn last_completion(&self) -> u64 {
        self.last_completion
    }

    pub fn channel_stats(&self) -> Vec<DramStats> {
        self.channels.iter().map(|c| c.stats.clone()).collect()
    }

    pub fn stats(&self) -> DramStats {
        let mut s = DramStats::default();
        for c in &self.channels {
            s.merge(&c.stats);
        }
        s
    }

    pub fn take_trace(&mut self) -> Option<Vec<TraceEntry>> {
        self.trace.take()
    }

    pub fn elapsed_ns(&self) -> f64 {
        self.last_completion as f64 * self.config.tck_ns
    }
}

impl Channel {
    fn ccd_ready(&self, group: usize, t: &Timings) -> u64 {
        match self.last_col {
            None => 0,
            Some((c, g)) if g == group => c + t.ccd_l,
            Some((c, _)) => c + t.ccd_s,
        }
    }

    fn row_wanted(&self, bank: usize, row: u64) -> bool {
        self.queue
            .iter()
            .take(SCHEDULING_WINDOW)
            .any(|q| q.bank == bank && q.row == row)
    }

    fn pick(&self, now: u64, t: &Timings) -> Option<Command> {
        let window = self.queue.len().min(SCHEDULING_WINDOW);
        for i in 0..window {
            let r = &self.queue[i];
            let b = &self.banks[r.bank];
            if r.arrival <= now
                && b.open_row == Some(r.row)
                && b.col_ready <= now
                && self.ccd_ready(r.group, t) <= now
                && now + t.cl >= self.bus_free
            {
                return Some(Command::Column(i));
            }
        }
        for i in 0..window {
            let r = &self.queue[i];
            if r.arrival > now {
                continue;
            }
            let b = &self.banks[r.bank];
            match b.open_row {
                None if b.act_ready <= now => return Some(Command::Activate(i)),
                Some(open)
                    if open != r.row && b.pre_ready <= now && !self.row_wanted(r.bank, open) =>
                {
                    return Some(Command::Precharge(i));
                }
                _ => {}
            }
        }
        None
    }

    fn earliest_command(&self, t: &Timings) -> Option<u64> {
        self.queue
            .iter()
            .take(SCHEDULING_WINDOW)
            .filter_map(|r| {
                let b = &self.banks[r.bank];
                let at = match b.open_row {
                    Some(open) if open == r.row => Some(
                        b.col_ready
                            .max(self.ccd_ready(r.group, t))
                            .max(self.bus_free.saturating_sub(t.cl)),
                    ),
                    None => Some(b.act_ready),
                    Some(open) if !self.row_wanted(r.bank, open) => Some(b.pre_ready),
                    Some(_) => None,
                };
                at.map(|c| c.max(r.arrival))
            })
            .min()
    }
}

/// Drives a fresh DRAM with requests arriving at the given cycles until all
/// complete. Returns the completions in completion order.
pub fn run_arrivals(dram: &mut Dram, arrivals: &[(u64, DramRequest)]) -> Result<Vec<Completion>> {
    let mut order: Vec<usize> = (0..arrivals.len()).collect();
    order.sort_by_key(|&i| arrivals[i].0);
    let mut next = 0;
    let mut done = Vec::with_capacity(arrivals.len());
    let mut cycle = arrivals.iter().map(|a| a.0).min().unwrap_or(0);
    loop {
        while next < order.len() && arrivals[order[next]].0 <= cycle {
            dram.enqueue(arrivals[order[next]].1, cycle)?;
            next += 1;
        }
        dram.tick(cycle, &mut done);
        let upcoming = order.get(next).map(|&i| arrivals[i].0);
        let event = dram.next_event();
        cycle = match (upcoming, event) {
            (None, None) => break,
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b).unwrap(),
        }
        .max(cycle + 1);
    }
    Ok(done)
}
