//! Window-level containers: filtered event batches, per-window aggregates,
//! and the final session report.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::emotion::EMOTION_COUNT;
use crate::event::DetectionEvent;
use crate::params::EngineParams;
use crate::state::EngagementState;

/// All retained detections for one time window, sorted by
/// `(timestamp_ms, camera_id, track_id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowBatch {
    pub window_index: u64,
    pub events: Vec<DetectionEvent>,
}

impl WindowBatch {
    pub fn empty(window_index: u64) -> Self {
        WindowBatch {
            window_index,
            events: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Sorts events into canonical batch order.
    pub fn sort_events(&mut self) {
        self.events
            .sort_by_key(|e| (e.timestamp_ms, e.camera_id, e.track_id));
    }
}

/// Scoring output for one window.
///
/// `psi` and `a_star` are absent for empty windows: no detections means no
/// evidence, and the smoothed score simply carries the last value forward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowAggregate {
    pub window_index: u64,
    pub retained_count: usize,
    pub gamma: [f64; EMOTION_COUNT],
    pub psi: Option<f64>,
    pub a_star: Option<f64>,
    pub a_smooth: Option<f64>,
    pub state_hint: Option<EngagementState>,
}

/// Final session-level result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub lambda_star: f64,
    pub final_state: EngagementState,
    pub windows: Vec<WindowAggregate>,
    pub transition_count: usize,
    pub params_used: EngineParams,
}

impl SessionReport {
    /// Counts adjacent windows whose state hints differ. Windows without a
    /// hint (leading empties) do not take part.
    pub fn count_transitions(windows: &[WindowAggregate]) -> usize {
        windows
            .iter()
            .filter_map(|w| w.state_hint)
            .collect::<Vec<_>>()
            .windows(2)
            .filter(|pair| pair[0] != pair[1])
            .count()
    }
}
