//! Memory-access abstractions: request producers, cache-line merging,
//! round-robin and priority merging, filters, crossbars, completion
//! callbacks, and the event loop that drives them against the DRAM model.

mod crossbar;
mod engine;
mod stream;

pub use crossbar::{Crossbar, QueueSpec};
pub use engine::{run, Accounting, EngineOptions, Model, Outcome, SimClock};
pub use stream::{
    boxed, drain, merged_reads, merged_writes, BoxStream, Chain, Deferred, Empty, Filter, Gate,
    LineMerge, MemRequest, Poll, Priority, PushQueue, RequestStream, RoundRobin, SeqProducer,
    StreamQueue, Trigger, Watch,
};
