//! Per-track temporal label smoothing.
//!
//! A track's emitted label only switches once the new label has been seen
//! in `m` consecutive observations, which suppresses single-frame flips
//! like happiness jumping straight to anger and back.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::emotion::EmotionLabel;
use crate::event::DetectionEvent;
use crate::window::WindowBatch;

/// Hysteresis state for one face track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackState {
    pub current_label: EmotionLabel,
    pub candidate_label: Option<EmotionLabel>,
    pub candidate_run: u32,
}

impl TrackState {
    fn new(initial: EmotionLabel) -> Self {
        TrackState {
            current_label: initial,
            candidate_label: None,
            candidate_run: 0,
        }
    }

    /// Feeds one observed label and returns the label to emit.
    fn observe(&mut self, observed: EmotionLabel, persistence: u32) -> EmotionLabel {
        if observed == self.current_label {
            self.candidate_label = None;
            self.candidate_run = 0;
            return self.current_label;
        }
        if self.candidate_label == Some(observed) {
            self.candidate_run += 1;
        } else {
            self.candidate_label = Some(observed);
            self.candidate_run = 1;
        }
        if self.candidate_run >= persistence {
            self.current_label = observed;
            self.candidate_label = None;
            self.candidate_run = 0;
        }
        self.current_label
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmoothError {
    MixedTrackIds { expected: u64, found: u64 },
    ZeroPersistence,
}

impl fmt::Display for SmoothError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothError::MixedTrackIds { expected, found } => {
                write!(f, "mixed track ids: expected {expected}, found {found}")
            }
            SmoothError::ZeroPersistence => write!(f, "persistence must be at least 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SmoothError {}

/// Smooths the labels of a single track's event sequence.
///
/// Everything except the label (timestamps, confidences, boxes, ordering)
/// passes through untouched. `m = 1` is the identity on labels.
pub fn smooth_track(
    events: &[DetectionEvent],
    persistence: u32,
) -> Result<Vec<DetectionEvent>, SmoothError> {
    if persistence == 0 {
        return Err(SmoothError::ZeroPersistence);
    }
    let Some(first) = events.first() else {
        return Ok(Vec::new());
    };
    let track_id = first.track_id;
    let mut state = TrackState::new(first.label);
    let mut out = Vec::with_capacity(events.len());
    for event in events {
        if event.track_id != track_id {
            return Err(SmoothError::MixedTrackIds {
                expected: track_id,
                found: event.track_id,
            });
        }
        let mut smoothed = *event;
        smoothed.label = state.observe(event.label, persistence);
        out.push(smoothed);
    }
    Ok(out)
}

/// Session-scoped smoother: carries per-track hysteresis state across
/// successive window batches.
#[derive(Debug)]
pub struct SessionSmoother {
    persistence: u32,
    tracks: BTreeMap<u64, TrackState>,
}

impl SessionSmoother {
    pub fn new(persistence: u32) -> Result<Self, SmoothError> {
        if persistence == 0 {
            return Err(SmoothError::ZeroPersistence);
        }
        Ok(SessionSmoother {
            persistence,
            tracks: BTreeMap::new(),
        })
    }

    /// Smooths one event in stream order.
    pub fn smooth_event(&mut self, event: &DetectionEvent) -> DetectionEvent {
        let state = self
            .tracks
            .entry(event.track_id)
            .or_insert_with(|| TrackState::new(event.label));
        let mut smoothed = *event;
        smoothed.label = state.observe(event.label, self.persistence);
        smoothed
    }

    /// Smooths a whole batch, preserving event count and ordering.
    pub fn smooth_batch(&mut self, batch: &WindowBatch) -> WindowBatch {
        WindowBatch {
            window_index: batch.window_index,
            events: batch.events.iter().map(|e| self.smooth_event(e)).collect(),
        }
    }
}
