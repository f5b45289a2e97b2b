//! Confidence filtering, window assignment, and the multi-source window
//! merger with per-source watermarks.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::event::DetectionEvent;
use crate::window::WindowBatch;

/// Keeps an event only when its confidence strictly exceeds `theta`.
pub fn filter_event(event: DetectionEvent, theta: f64) -> Option<DetectionEvent> {
    (event.confidence > theta).then_some(event)
}

/// Window index of an event: `floor(timestamp_ms / window_ms)`.
pub fn assign_window(event: &DetectionEvent, window_ms: u64) -> u64 {
    debug_assert!(window_ms > 0);
    event.timestamp_ms / window_ms
}

/// Counters for events the merger refused, shareable across threads.
#[derive(Debug, Default)]
pub struct DropCounters {
    /// Events that went backwards in time within a single source.
    pub out_of_order: AtomicU64,
    /// Events that arrived for a window already emitted.
    pub late: AtomicU64,
    /// Events rejected below the confidence threshold.
    pub below_threshold: AtomicU64,
}

impl DropCounters {
    pub fn out_of_order_count(&self) -> u64 {
        self.out_of_order.load(Ordering::Relaxed)
    }

    pub fn late_count(&self) -> u64 {
        self.late.load(Ordering::Relaxed)
    }

    pub fn below_threshold_count(&self) -> u64 {
        self.below_threshold.load(Ordering::Relaxed)
    }
}

/// Identifier handed out by [`StreamMerger::add_source`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceId(usize);

#[derive(Debug)]
struct SourceState {
    /// Highest timestamp delivered by this source, if any.
    high_water: Option<u64>,
    ended: bool,
}

/// Merges per-source timestamp-ordered event streams into window batches.
///
/// A window closes only once every live source has delivered an event at or
/// past the window's end (or ended). Batches come out in strictly increasing
/// window order, empty windows included; anything arriving for an
/// already-closed window is dropped and counted, never re-opened.
#[derive(Debug)]
pub struct StreamMerger {
    window_ms: u64,
    theta: f64,
    sources: Vec<SourceState>,
    pending: BTreeMap<u64, Vec<DetectionEvent>>,
    next_window: u64,
    counters: Arc<DropCounters>,
}

impl StreamMerger {
    pub fn new(window_ms: u64, theta: f64) -> Self {
        assert!(window_ms > 0, "window_ms must be positive");
        StreamMerger {
            window_ms,
            theta,
            sources: Vec::new(),
            pending: BTreeMap::new(),
            next_window: 0,
            counters: Arc::new(DropCounters::default()),
        }
    }

    /// Registers a new source. Sources may join mid-session; events they
    /// deliver for already-emitted windows are dropped as late.
    pub fn add_source(&mut self) -> SourceId {
        self.sources.push(SourceState {
            high_water: None,
            ended: false,
        });
        SourceId(self.sources.len() - 1)
    }

    pub fn counters(&self) -> Arc<DropCounters> {
        Arc::clone(&self.counters)
    }

    /// Delivers one event from `source`, returning any window batches that
    /// became complete.
    pub fn push(&mut self, source: SourceId, event: DetectionEvent) -> Vec<WindowBatch> {
        let state = &mut self.sources[source.0];
        if state.ended {
            self.counters.late.fetch_add(1, Ordering::Relaxed);
            return Vec::new();
        }
        if let Some(hw) = state.high_water {
            if event.timestamp_ms < hw {
                self.counters.out_of_order.fetch_add(1, Ordering::Relaxed);
                return Vec::new();
            }
        }
        state.high_water = Some(event.timestamp_ms);

        let window = event.timestamp_ms / self.window_ms;
        if window < self.next_window {
            self.counters.late.fetch_add(1, Ordering::Relaxed);
        } else if let Some(event) = filter_event(event, self.theta) {
            self.pending.entry(window).or_default().push(event);
        } else {
            self.counters.below_threshold.fetch_add(1, Ordering::Relaxed);
        }
        self.drain_ready()
    }

    /// Marks a source finished, releasing windows it was holding back.
    pub fn end_source(&mut self, source: SourceId) -> Vec<WindowBatch> {
        self.sources[source.0].ended = true;
        self.drain_ready()
    }

    /// Ends every source and flushes all remaining windows.
    pub fn finish(&mut self) -> Vec<WindowBatch> {
        for s in &mut self.sources {
            s.ended = true;
        }
        let mut out = self.drain_ready();
        // All sources ended: emit whatever is still pending, gaps included.
        if let Some((&last, _)) = self.pending.iter().next_back() {
            while self.next_window <= last {
                out.push(self.take_window(self.next_window));
                self.next_window += 1;
            }
        }
        out
    }

    /// Watermark over live sources; `None` while any live source has not
    /// spoken yet, `u64::MAX` when every source has ended.
    fn watermark(&self) -> Option<u64> {
        let mut mark = u64::MAX;
        for s in &self.sources {
            if s.ended {
                continue;
            }
            match s.high_water {
                Some(hw) => mark = mark.min(hw),
                None => return None,
            }
        }
        Some(mark)
    }

    fn drain_ready(&mut self) -> Vec<WindowBatch> {
        let Some(mark) = self.watermark() else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if mark == u64::MAX {
            // Every source ended; only finish() flushes trailing windows so
            // the flush happens exactly once.
            return out;
        }
        while (self.next_window + 1).saturating_mul(self.window_ms) <= mark {
            out.push(self.take_window(self.next_window));
            self.next_window += 1;
        }
        out
    }

    fn take_window(&mut self, index: u64) -> WindowBatch {
        let mut batch = WindowBatch {
            window_index: index,
            events: self.pending.remove(&index).unwrap_or_default(),
        };
        batch.sort_events();
        batch
    }
}
