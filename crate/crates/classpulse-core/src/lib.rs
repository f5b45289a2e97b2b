//! Core engine for real-time classroom engagement analytics.
//!
//! Turns streams of per-face emotion detections into windowed engagement
//! scores and a session-level classification. The pipeline: confidence
//! filtering and watermark-based window merging, per-track label
//! hysteresis, confidence-weighted emotion frequencies, a weighted raw
//! score with variance regularization and EMA smoothing, time-weighted
//! session aggregation, and threshold classification. Companion modules
//! provide a deterministic classroom simulator, weight/threshold
//! calibration, and robustness analyses.
//!
//! The crate is `no_std` + `alloc`; everything IO-shaped lives in the
//! `classpulse` companion crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod calibration;
pub mod consistency;
pub mod emotion;
pub mod engine;
pub mod event;
pub mod params;
pub mod state;
pub mod synth;
pub mod window;
pub mod windowing;

pub use emotion::{EmotionLabel, EMOTION_COUNT};
pub use event::{BBox, DetectionEvent, EventError};
pub use params::{BetaWeights, EngineParams, GammaDenominator, ParamError, Thresholds};
pub use state::EngagementState;
pub use window::{SessionReport, WindowAggregate, WindowBatch};
