//! Pull-based request streams and their combinators.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::rc::Rc;

use crate::dram::{Kind, LINE_BYTES};
use crate::partition::RegionKind;

/// A memory access before or after cache-line merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemRequest {
    pub kind: Kind,
    pub channel: usize,
    pub addr: u64,
    pub bytes: u32,
    pub region: RegionKind,
    /// Identifies the producing stream; completions are dispatched by it.
    pub source: u32,
    /// Tag of the first record ending in this request.
    pub tag: u64,
    /// Number of records ending in this request.
    pub count: u32,
    /// Record bytes carried by this request.
    pub payload: u32,
}

impl MemRequest {
    /// A single record of `bytes` bytes.
    pub fn record(
        kind: Kind,
        channel: usize,
        addr: u64,
        bytes: u32,
        region: RegionKind,
        source: u32,
        tag: u64,
    ) -> MemRequest {
        MemRequest {
            kind,
            channel,
            addr,
            bytes,
            region,
            source,
            tag,
            count: 1,
            payload: bytes,
        }
    }

    pub fn line(&self) -> u64 {
        self.addr / LINE_BYTES
    }

    /// Tags of the records ending in this request.
    pub fn tags(&self) -> std::ops::Range<u64> {
        self.tag..self.tag + self.count as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Poll {
    Ready(MemRequest),
    /// Nothing available now; more may come later.
    Pending,
    /// Exhausted for good.
    Done,
}

pub trait RequestStream {
    fn poll(&mut self) -> Poll;
}

pub type BoxStream = Box<dyn RequestStream>;

impl RequestStream for BoxStream {
    fn poll(&mut self) -> Poll {
        (**self).poll()
    }
}

/// Set once a producer has emitted its last request.
#[derive(Debug, Clone, Default)]
pub struct Trigger(Rc<std::cell::Cell<bool>>);

impl Trigger {
    pub fn new() -> Trigger {
        Trigger::default()
    }

    pub fn fired(&self) -> bool {
        self.0.get()
    }

    pub fn fire(&self) {
        self.0.set(true);
    }
}

/// Forwards its input and fires a trigger once the input is exhausted.
pub struct Watch<S> {
    inner: S,
    done: Trigger,
}

impl<S: RequestStream> Watch<S> {
    pub fn new(inner: S, done: Trigger) -> Watch<S> {
        Watch { inner, done }
    }
}

impl<S: RequestStream> RequestStream for Watch<S> {
    fn poll(&mut self) -> Poll {
        let p = self.inner.poll();
        if p == Poll::Done {
            self.done.fire();
        }
        p
    }
}

/// `count` records of `record_bytes` at ascending addresses from `base`,
/// tagged `first_tag..first_tag + count`.
#[derive(Debug)]
pub struct SeqProducer {
    kind: Kind,
    channel: usize,
    region: RegionKind,
    source: u32,
    next_addr: u64,
    next_tag: u64,
    remaining: u64,
    record_bytes: u32,
    trigger: Option<Trigger>,
}

impl SeqProducer {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: Kind,
        channel: usize,
        region: RegionKind,
        source: u32,
        base: u64,
        count: u64,
        record_bytes: u32,
        first_tag: u64,
    ) -> SeqProducer {
        SeqProducer {
            kind,
            channel,
            region,
            source,
            next_addr: base,
            next_tag: first_tag,
            remaining: count,
            record_bytes,
            trigger: None,
        }
    }

    pub fn reads(
        channel: usize,
        region: RegionKind,
        source: u32,
        base: u64,
        count: u64,
        record_bytes: u32,
    ) -> SeqProducer {
        SeqProducer::new(
            Kind::Read,
            channel,
            region,
            source,
            base,
            count,
            record_bytes,
            0,
        )
    }

    pub fn with_trigger(mut self, trigger: Trigger) -> SeqProducer {
        if self.remaining == 0 {
            trigger.fire();
        }
        self.trigger = Some(trigger);
        self
    }
}

impl RequestStream for SeqProducer {
    fn poll(&mut self) -> Poll {
        if self.remaining == 0 {
            return Poll::Done;
        }
        let r = MemRequest::record(
            self.kind,
            self.channel,
            self.next_addr,
            self.record_bytes,
            self.region,
            self.source,
            self.next_tag,
        );
        self.next_addr += self.record_bytes as u64;
        self.next_tag += 1;
        self.remaining -= 1;
        if self.remaining == 0 {
            if let Some(t) = &self.trigger {
                t.fire();
            }
        }
        Poll::Ready(r)
    }
}

/// Collapses consecutive records falling into the same 64-byte line into one
/// line request. A record crossing a line boundary is split; it counts toward
/// the line it ends in. The open line is held while the input is pending and
/// released when a record for another line arrives or the input finishes.
/// An eager merger releases the open line as soon as the input pends.
pub struct LineMerge<S> {
    inner: S,
    held: Option<MemRequest>,
    out: VecDeque<MemRequest>,
    done: bool,
    eager: bool,
}

impl<S: RequestStream> LineMerge<S> {
    pub fn new(inner: S) -> LineMerge<S> {
        LineMerge {
            inner,
            held: None,
            out: VecDeque::new(),
            done: false,
            eager: false,
        }
    }

    pub fn eager(inner: S) -> LineMerge<S> {
        LineMerge {
            eager: true,
            ..LineMerge::new(inner)
        }
    }

    fn absorb(&mut self, rec: MemRequest) {
        debug_assert!(rec.bytes > 0);
        let end = rec.addr + rec.bytes as u64;
        let mut addr = rec.addr;
        while addr < end {
            let line = addr / LINE_BYTES;
            let line_end = (line + 1) * LINE_BYTES;
            let piece_end = line_end.min(end);
            let piece = (piece_end - addr) as u32;
            let count = u32::from(end <= line_end);
            match &mut self.held {
                Some(h)
                    if h.line() == line
                        && h.kind == rec.kind
                        && h.channel == rec.channel
                        && h.source == rec.source =>
                {
                    if h.count == 0 {
                        h.tag = rec.tag;
                    }
                    h.count += count;
                    h.payload += piece;
                }
                _ => {
                    if let Some(h) = self.held.take() {
                        self.out.push_back(h);
                    }
                    self.held = Some(MemRequest {
                        addr: line * LINE_BYTES,
                        bytes: LINE_BYTES as u32,
                        count,
                        payload: piece,
                        ..rec
                    });
                }
            }
            addr = piece_end;
        }
    }
}

impl<S: RequestStream> RequestStream for LineMerge<S> {
    fn poll(&mut self) -> Poll {
        loop {
            if let Some(r) = self.out.pop_front() {
                return Poll::Ready(r);
            }
            if self.done {
                return Poll::Done;
            }
            match self.inner.poll() {
                Poll::Ready(rec) => self.absorb(rec),
                Poll::Pending => match self.held.take() {
                    Some(h) if self.eager => return Poll::Ready(h),
                    held => {
                        self.held = held;
                        return Poll::Pending;
                    }
                },
                Poll::Done => {
                    self.done = true;
                    if let Some(h) = self.held.take() {
                        self.out.push_back(h);
                    }
                }
            }
        }
    }
}

/// Cycles through its inputs, skipping inputs with nothing to offer.
pub struct RoundRobin {
    inputs: Vec<BoxStream>,
    done: Vec<bool>,
    next: usize,
}

impl RoundRobin {
    pub fn new(inputs: Vec<BoxStream>) -> RoundRobin {
        let done = vec![false; inputs.len()];
        RoundRobin {
            inputs,
            done,
            next: 0,
        }
    }
}

impl RequestStream for RoundRobin {
    fn poll(&mut self) -> Poll {
        let n = self.inputs.len();
        let mut any_pending = false;
        for k in 0..n {
            let i = (self.next + k) % n;
            if self.done[i] {
                continue;
            }
            match self.inputs[i].poll() {
                Poll::Ready(r) => {
                    self.next = (i + 1) % n;
                    return Poll::Ready(r);
                }
                Poll::Pending => any_pending = true,
                Poll::Done => self.done[i] = true,
            }
        }
        if any_pending {
            Poll::Pending
        } else {
            Poll::Done
        }
    }
}

/// Always serves the first input that has a request ready. Lower inputs may
/// starve.
pub struct Priority {
    inputs: Vec<BoxStream>,
    done: Vec<bool>,
}

impl Priority {
    pub fn new(inputs: Vec<BoxStream>) -> Priority {
        let done = vec![false; inputs.len()];
        Priority { inputs, done }
    }
}

impl RequestStream for Priority {
    fn poll(&mut self) -> Poll {
        let mut any_pending = false;
        for (input, done) in self.inputs.iter_mut().zip(self.done.iter_mut()) {
            if *done {
                continue;
            }
            match input.poll() {
                Poll::Ready(r) => return Poll::Ready(r),
                Poll::Pending => any_pending = true,
                Poll::Done => *done = true,
            }
        }
        if any_pending {
            Poll::Pending
        } else {
            Poll::Done
        }
    }
}

/// Passes only requests accepted by the predicate.
pub struct Filter<S> {
    inner: S,
    keep: Box<dyn FnMut(&MemRequest) -> bool>,
}

impl<S: RequestStream> Filter<S> {
    pub fn new(inner: S, keep: impl FnMut(&MemRequest) -> bool + 'static) -> Filter<S> {
        Filter {
            inner,
            keep: Box::new(keep),
        }
    }
}

impl<S: RequestStream> RequestStream for Filter<S> {
    fn poll(&mut self) -> Poll {
        loop {
            match self.inner.poll() {
                Poll::Ready(r) if !(self.keep)(&r) => continue,
                other => return other,
            }
        }
    }
}

/// Runs its inputs one after another.
pub struct Chain {
    inputs: VecDeque<BoxStream>,
}

impl Chain {
    pub fn new(inputs: Vec<BoxStream>) -> Chain {
        Chain {
            inputs: inputs.into(),
        }
    }
}

impl RequestStream for Chain {
    fn poll(&mut self) -> Poll {
        while let Some(front) = self.inputs.front_mut() {
            match front.poll() {
                Poll::Done => {
                    self.inputs.pop_front();
                }
                other => return other,
            }
        }
        Poll::Done
    }
}

/// Builds its stream on first poll, so decisions can use state at that time.
pub struct Deferred {
    make: Option<Box<dyn FnOnce() -> BoxStream>>,
    inner: Option<BoxStream>,
}

impl Deferred {
    pub fn new(make: impl FnOnce() -> BoxStream + 'static) -> Deferred {
        Deferred {
            make: Some(Box::new(make)),
            inner: None,
        }
    }
}

impl RequestStream for Deferred {
    fn poll(&mut self) -> Poll {
        if let Some(make) = self.make.take() {
            self.inner = Some(make());
        }
        self.inner.as_mut().map_or(Poll::Done, |s| s.poll())
    }
}

/// Pending until its condition holds, then forwards its input.
pub struct Gate<S> {
    inner: S,
    open: Box<dyn Fn() -> bool>,
    opened: bool,
}

impl<S: RequestStream> Gate<S> {
    pub fn new(inner: S, open: impl Fn() -> bool + 'static) -> Gate<S> {
        Gate {
            inner,
            open: Box::new(open),
            opened: false,
        }
    }
}

impl<S: RequestStream> RequestStream for Gate<S> {
    fn poll(&mut self) -> Poll {
        if !self.opened {
            if !(self.open)() {
                return Poll::Pending;
            }
            self.opened = true;
        }
        self.inner.poll()
    }
}

/// Yields nothing.
pub struct Empty;

impl RequestStream for Empty {
    fn poll(&mut self) -> Poll {
        Poll::Done
    }
}

#[derive(Debug, Default)]
struct QueueState {
    items: VecDeque<MemRequest>,
    closed: bool,
}

/// A FIFO filled from outside the stream graph, typically by completion
/// callbacks. Pending while empty and open; done once empty and closed.
#[derive(Debug, Clone, Default)]
pub struct PushQueue(Rc<RefCell<QueueState>>);

impl PushQueue {
    pub fn new() -> PushQueue {
        PushQueue::default()
    }

    pub fn push(&self, r: MemRequest) {
        self.0.borrow_mut().items.push_back(r);
    }

    pub fn close(&self) {
        self.0.borrow_mut().closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.0.borrow().closed
    }

    pub fn len(&self) -> usize {
        self.0.borrow().items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stream(&self) -> PushQueue {
        self.clone()
    }
}

impl RequestStream for PushQueue {
    fn poll(&mut self) -> Poll {
        let mut s = self.0.borrow_mut();
        match s.items.pop_front() {
            Some(r) => Poll::Ready(r),
            None if s.closed => Poll::Done,
            None => Poll::Pending,
        }
    }
}

#[derive(Default)]
struct StreamQueueState {
    items: VecDeque<BoxStream>,
    closed: bool,
}

/// Runs streams appended from outside one after another. Pending while
/// empty and open; done once empty and closed.
#[derive(Clone, Default)]
pub struct StreamQueue(Rc<RefCell<StreamQueueState>>);

impl StreamQueue {
    pub fn new() -> StreamQueue {
        StreamQueue::default()
    }

    pub fn push(&self, s: BoxStream) {
        self.0.borrow_mut().items.push_back(s);
    }

    pub fn close(&self) {
        self.0.borrow_mut().closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.0.borrow().closed
    }
}

impl RequestStream for StreamQueue {
    fn poll(&mut self) -> Poll {
        let mut s = self.0.borrow_mut();
        while let Some(front) = s.items.front_mut() {
            match front.poll() {
                Poll::Done => {
                    s.items.pop_front();
                }
                other => return other,
            }
        }
        if s.closed {
            Poll::Done
        } else {
            Poll::Pending
        }
    }
}

/// Boxes a stream.
pub fn boxed(s: impl RequestStream + 'static) -> BoxStream {
    Box::new(s)
}

/// Sequential reads merged into lines.
pub fn merged_reads(
    channel: usize,
    region: RegionKind,
    source: u32,
    base: u64,
    count: u64,
    record_bytes: u32,
) -> BoxStream {
    boxed(LineMerge::new(SeqProducer::reads(
        channel,
        region,
        source,
        base,
        count,
        record_bytes,
    )))
}

/// Sequential writes merged into lines.
pub fn merged_writes(
    channel: usize,
    region: RegionKind,
    source: u32,
    base: u64,
    count: u64,
    record_bytes: u32,
) -> BoxStream {
    boxed(LineMerge::new(SeqProducer::new(
        Kind::Write,
        channel,
        region,
        source,
        base,
        count,
        record_bytes,
        0,
    )))
}

/// Drains a stream that never pends; for tests and analysis.
pub fn drain(mut s: impl RequestStream) -> Vec<MemRequest> {
    let mut v = Vec::new();
    while let Poll::Ready(r) = s.poll() {
        v.push(r);
    }
    v
}
