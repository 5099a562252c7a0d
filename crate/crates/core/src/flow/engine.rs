//! Event loop binding accelerator cycles to DRAM cycles.

use std::collections::HashMap;

use super::stream::{MemRequest, Poll};
use crate::dram::{Completion, Dram, DramRequest, Kind, LINE_BYTES};
use crate::error::{Error, Result};
use crate::partition::RegionKind;

/// An accelerator as seen by the event loop: one request stream per memory
/// endpoint plus completion callbacks keyed by the request's source stream.
pub trait Model {
    fn endpoints(&self) -> usize;

    /// On-chip work of accelerator cycle `cycle`, done before the endpoints
    /// are polled. Returns whether anything happened.
    fn step(&mut self, cycle: u64, acct: &Accounting) -> Result<bool>;

    /// Next request of an endpoint. An endpoint turning done counts as
    /// progress, so the model gets another step to react to it.
    fn poll(&mut self, endpoint: usize) -> Poll;

    /// Completion callback for a request issued earlier.
    fn complete(&mut self, req: &MemRequest) -> Result<()>;

    fn finished(&self) -> bool;
}

/// Both clock domains. Instants closer than a femtosecond are treated as
/// simultaneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    pub accel_freq_mhz: f64,
    pub dram_tck_ns: f64,
    pub accel_cycle: u64,
    pub dram_cycle: u64,
}

const EPS_NS: f64 = 1e-6;

impl SimClock {
    pub fn new(accel_freq_mhz: f64, dram_tck_ns: f64) -> Result<SimClock> {
        if accel_freq_mhz.is_nan()
            || accel_freq_mhz <= 0.0
            || dram_tck_ns.is_nan()
            || dram_tck_ns <= 0.0
        {
            return Err(Error::Unsupported(
                "clock frequency and DRAM period must be positive".into(),
            ));
        }
        Ok(SimClock {
            accel_freq_mhz,
            dram_tck_ns,
            accel_cycle: 0,
            dram_cycle: 0,
        })
    }

    pub fn accel_period_ns(&self) -> f64 {
        1e3 / self.accel_freq_mhz
    }

    pub fn accel_time_ns(&self, cycle: u64) -> f64 {
        cycle as f64 * self.accel_period_ns()
    }

    pub fn dram_time_ns(&self, cycle: u64) -> f64 {
        cycle as f64 * self.dram_tck_ns
    }

    /// Whether accelerator cycle `a` starts no later than DRAM cycle `d`.
    pub fn accel_not_after(&self, a: u64, d: u64) -> bool {
        self.accel_time_ns(a) <= self.dram_time_ns(d) + EPS_NS
    }

    /// First DRAM cycle not earlier than accelerator cycle `cycle`.
    pub fn dram_cycle_at(&self, cycle: u64) -> u64 {
        ((self.accel_time_ns(cycle) - EPS_NS) / self.dram_tck_ns)
            .ceil()
            .max(0.0) as u64
    }

    /// First accelerator cycle strictly after DRAM cycle `cycle`.
    pub fn accel_cycle_after(&self, cycle: u64) -> u64 {
        ((self.dram_time_ns(cycle) + EPS_NS) / self.accel_period_ns()).floor() as u64 + 1
    }

    pub fn accel_ns(&self) -> f64 {
        self.accel_time_ns(self.accel_cycle)
    }

    pub fn dram_ns(&self) -> f64 {
        self.dram_time_ns(self.dram_cycle)
    }
}

fn region_index(r: RegionKind) -> usize {
    match r {
        RegionKind::Values => 0,
        RegionKind::Pointers => 1,
        RegionKind::Edges => 2,
        RegionKind::Updates => 3,
    }
}

/// Issued request counters per region and direction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Accounting {
    /// Record bytes carried, indexed by region then read/write.
    payload: [[u64; 2]; 4],
    /// Line requests, indexed the same way.
    lines: [[u64; 2]; 4],
}

impl Accounting {
    fn record(&mut self, r: &MemRequest) {
        let k = usize::from(r.kind == Kind::Write);
        self.payload[region_index(r.region)][k] += r.payload as u64;
        self.lines[region_index(r.region)][k] += 1;
    }

    pub fn payload_bytes(&self, region: RegionKind, kind: Kind) -> u64 {
        self.payload[region_index(region)][usize::from(kind == Kind::Write)]
    }

    pub fn line_requests(&self, region: RegionKind, kind: Kind) -> u64 {
        self.lines[region_index(region)][usize::from(kind == Kind::Write)]
    }

    pub fn requests(&self) -> u64 {
        self.lines.iter().flatten().sum()
    }

    pub fn line_bytes(&self) -> u64 {
        self.requests() * LINE_BYTES
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    /// Accelerator cycles without any request, completion or idle detection
    /// before the run is declared stuck.
    pub stall_budget: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            stall_budget: 1 << 32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Time of the last completed transfer.
    pub elapsed_ns: f64,
    pub clock: SimClock,
    pub accounting: Accounting,
}

/// Runs `model` against `dram` until the model is finished and the DRAM has
/// drained. Accelerator work at a given instant happens before the DRAM
/// cycle at the same instant; idle stretches are skipped.
pub fn run(
    model: &mut dyn Model,
    dram: &mut Dram,
    mut clock: SimClock,
    opts: EngineOptions,
) -> Result<Outcome> {
    let endpoints = model.endpoints();
    if endpoints > dram.config().channels {
        return Err(Error::ChannelOutOfRange {
            channel: endpoints - 1,
            channels: dram.config().channels,
        });
    }
    let mut acct = Accounting::default();
    let mut inflight: HashMap<u64, MemRequest> = HashMap::new();
    let mut next_id = 0u64;
    let mut accel = 0u64;
    let mut dram_next = 0u64;
    let mut awake = true;
    let mut stalled = 0u64;
    let mut done: Vec<Completion> = Vec::new();
    let mut ep_done = vec![false; endpoints];

    loop {
        if model.finished() && dram.is_idle() {
            break;
        }
        let dram_at = dram.next_event().map(|e| e.max(dram_next));
        let accel_first = match (awake, dram_at) {
            (false, None) => {
                return Err(Error::Deadlock(format!(
                    "no outstanding requests and no runnable work at accelerator cycle {accel}"
                )))
            }
            (true, None) => true,
            (false, Some(_)) => false,
            (true, Some(e)) => clock.accel_not_after(accel, e),
        };
        if accel_first {
            let mut progressed = model.step(accel, &acct)?;
            let mut issued = false;
            let arrival = clock.dram_cycle_at(accel).max(dram_next);
            for (ep, was_done) in ep_done.iter_mut().enumerate() {
                let polled = model.poll(ep);
                let now_done = polled == Poll::Done;
                if now_done && !*was_done {
                    progressed = true;
                }
                *was_done = now_done;
                if let Poll::Ready(r) = polled {
                    if r.channel != ep {
                        return Err(Error::ChannelOutOfRange {
                            channel: r.channel,
                            channels: endpoints,
                        });
                    }
                    if r.addr % LINE_BYTES + r.bytes as u64 > LINE_BYTES {
                        return Err(Error::Layout(format!(
                            "request at {:#x} of {} bytes crosses a line",
                            r.addr, r.bytes
                        )));
                    }
                    let req = DramRequest {
                        id: next_id,
                        kind: r.kind,
                        channel: r.channel,
                        address: r.addr - r.addr % LINE_BYTES,
                    };
                    dram.enqueue(req, arrival)?;
                    acct.record(&r);
                    inflight.insert(next_id, r);
                    next_id += 1;
                    issued = true;
                }
            }
            accel += 1;
            if issued {
                stalled = 0;
            } else if progressed {
                stalled += 1;
                if stalled > opts.stall_budget {
                    return Err(Error::Deadlock(format!(
                        "{stalled} accelerator cycles without memory activity"
                    )));
                }
            } else {
                awake = false;
            }
        } else {
            let e = dram_at.expect("dram event");
            done.clear();
            dram.tick(e, &mut done);
            dram_next = e + 1;
            if !done.is_empty() {
                stalled = 0;
                for c in &done {
                    let r = inflight
                        .remove(&c.id)
                        .expect("completion of unknown request");
                    model.complete(&r)?;
                }
                if !awake {
                    accel = accel.max(clock.accel_cycle_after(e));
                }
                awake = true;
            }
        }
    }
    clock.accel_cycle = accel;
    clock.dram_cycle = dram.last_completion();
    Ok(Outcome {
        elapsed_ns: dram.elapsed_ns(),
        clock,
        accounting: acct,
    })
}
