//! Window scoring pipeline: emotion frequencies, weighted raw score,
//! variance regularization, EMA smoothing, session aggregation, and
//! threshold classification.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use crate::emotion::{EmotionLabel, EMOTION_COUNT};
use crate::params::{EngineParams, GammaDenominator};
use crate::state::EngagementState;
use crate::window::{SessionReport, WindowAggregate, WindowBatch};

/// Smoothing state carried between windows.
#[derive(Debug, Clone, Default)]
pub struct EmaState {
    /// Last smoothed score, absent before the first non-empty window.
    pub previous: Option<f64>,
    /// Trailing raw scores for the variance term, bounded by the
    /// configured variance window.
    pub history: VecDeque<f64>,
}

impl EmaState {
    pub fn new() -> Self {
        EmaState::default()
    }

    /// Appends a raw score, evicting the oldest once `window` is exceeded.
    pub fn push_raw(&mut self, psi: f64, window: usize) {
        self.history.push_back(psi);
        while self.history.len() > window.max(1) {
            self.history.pop_front();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineError {
    NoWindows,
    OutOfOrderWindow { expected: u64, got: u64 },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::NoWindows => write!(f, "no windows"),
            EngineError::OutOfOrderWindow { expected, got } => {
                write!(f, "window {got} out of order, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EngineError {}

/// Confidence-weighted per-emotion frequency vector for one batch.
///
/// Each entry sums the confidences of detections carrying that label,
/// divided by the retained detection count (or, behind the config switch,
/// the distinct frame count). An empty batch yields the zero vector.
pub fn compute_frequencies(
    batch: &WindowBatch,
    denominator: GammaDenominator,
) -> [f64; EMOTION_COUNT] {
    let mut gamma = [0.0; EMOTION_COUNT];
    if batch.events.is_empty() {
        return gamma;
    }
    for event in &batch.events {
        gamma[event.label.pos()] += event.confidence;
    }
    let denom = match denominator {
        GammaDenominator::RetainedCount => batch.events.len(),
        GammaDenominator::FrameCount => {
            let mut frames: Vec<(u32, u64)> = batch
                .events
                .iter()
                .map(|e| (e.camera_id, e.frame_index))
                .collect();
            frames.sort_unstable();
            frames.dedup();
            frames.len()
        }
    };
    for g in &mut gamma {
        *g /= denom as f64;
    }
    gamma
}

/// Weighted raw score: dot product of the frequency vector with the
/// emotion weights, plus the bias term.
pub fn raw_score(gamma: &[f64; EMOTION_COUNT], params: &EngineParams) -> f64 {
    let mut psi = params.eta;
    for label in EmotionLabel::ALL {
        psi += gamma[label.pos()] * params.beta.get(label);
    }
    psi
}

/// Population variance of a slice; 0 for fewer than two samples.
fn population_variance(values: &VecDeque<f64>) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
}

/// Subtracts the variance penalty over the trailing raw scores.
///
/// Expects `state.history` to already contain `psi` as its newest entry.
pub fn variance_regularize(psi: f64, state: &EmaState, params: &EngineParams) -> f64 {
    psi - params.lambda_reg * population_variance(&state.history)
}

/// Exponential moving average step; the first score passes through as is.
pub fn ema_update(a_star: f64, state: &mut EmaState, params: &EngineParams) -> f64 {
    let smoothed = match state.previous {
        None => a_star,
        Some(prev) => params.alpha * prev + (1.0 - params.alpha) * a_star,
    };
    state.previous = Some(smoothed);
    smoothed
}

/// Time-weighted session aggregate: later windows weigh `1 + delta * idx`,
/// the weighted mean is clamped to `[0, 1]`.
pub fn aggregate_session(smoothed: &[f64], params: &EngineParams) -> Result<f64, EngineError> {
    if smoothed.is_empty() {
        return Err(EngineError::NoWindows);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (idx, value) in smoothed.iter().enumerate() {
        let weight = 1.0 + params.delta * idx as f64;
        num += weight * value;
        den += weight;
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Threshold classification of a session score.
pub fn classify_state(lambda_star: f64, params: &EngineParams) -> EngagementState {
    params.classify(lambda_star)
}

/// Streaming scoring engine for one session. Windows must arrive in
/// strictly increasing index order.
#[derive(Debug)]
pub struct Engine {
    params: EngineParams,
    state: EmaState,
    next_window: Option<u64>,
    windows: Vec<WindowAggregate>,
}

impl Engine {
    pub fn new(params: EngineParams) -> Self {
        Engine {
            params,
            state: EmaState::new(),
            next_window: None,
            windows: Vec::new(),
        }
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    /// Scores one window batch.
    ///
    /// Empty windows carry the previous smoothed score forward and record
    /// no raw score; leading empty windows have no score at all.
    pub fn process_window(&mut self, batch: &WindowBatch) -> Result<WindowAggregate, EngineError> {
        if let Some(expected) = self.next_window {
            if batch.window_index != expected {
                return Err(EngineError::OutOfOrderWindow {
                    expected,
                    got: batch.window_index,
                });
            }
        }
        self.next_window = Some(batch.window_index + 1);

        let gamma = compute_frequencies(batch, self.params.gamma_denominator);
        let aggregate = if batch.events.is_empty() {
            WindowAggregate {
                window_index: batch.window_index,
                retained_count: 0,
                gamma,
                psi: None,
                a_star: None,
                a_smooth: self.state.previous,
                state_hint: self
                    .state
                    .previous
                    .map(|held| classify_state(held, &self.params)),
            }
        } else {
            let psi = raw_score(&gamma, &self.params);
            self.state.push_raw(psi, self.params.variance_window);
            let a_star = variance_regularize(psi, &self.state, &self.params);
            let a_smooth = ema_update(a_star, &mut self.state, &self.params);
            WindowAggregate {
                window_index: batch.window_index,
                retained_count: batch.events.len(),
                gamma,
                psi: Some(psi),
                a_star: Some(a_star),
                a_smooth: Some(a_smooth),
                state_hint: Some(classify_state(a_smooth, &self.params)),
            }
        };
        self.windows.push(aggregate.clone());
        Ok(aggregate)
    }

    /// Computes the session score over every window that carries a
    /// smoothed value (held values included) and closes the session.
    pub fn finish(self) -> Result<SessionReport, EngineError> {
        let smoothed: Vec<f64> = self.windows.iter().filter_map(|w| w.a_smooth).collect();
        let lambda_star = aggregate_session(&smoothed, &self.params)?;
        let final_state = classify_state(lambda_star, &self.params);
        let transition_count = SessionReport::count_transitions(&self.windows);
        Ok(SessionReport {
            lambda_star,
            final_state,
            windows: self.windows,
            transition_count,
            params_used: self.params,
        })
    }
}

/// One-shot convenience: drives the engine over a batch sequence.
pub fn run_session(
    batches: &[WindowBatch],
    params: &EngineParams,
) -> Result<SessionReport, EngineError> {
    let mut engine = Engine::new(params.clone());
    for batch in batches {
        engine.process_window(batch)?;
    }
    engine.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{BBox, DetectionEvent};

    fn detection(label: EmotionLabel, confidence: f64) -> DetectionEvent {
        DetectionEvent {
            camera_id: 0,
            frame_index: 0,
            timestamp_ms: 0,
            track_id: 0,
            bbox: BBox(0.5, 0.5, 0.1, 0.1),
            label,
            confidence,
        }
    }

    fn batch(index: u64, detections: &[(EmotionLabel, f64)]) -> WindowBatch {
        WindowBatch {
            window_index: index,
            events: detections.iter().map(|&(l, c)| detection(l, c)).collect(),
        }
    }

    fn defaults() -> EngineParams {
        EngineParams::default()
    }

    #[test]
    fn frequencies_weight_by_confidence() {
        let b = batch(
            0,
            &[
                (EmotionLabel::Happiness, 0.9),
                (EmotionLabel::Happiness, 0.8),
                (EmotionLabel::Sadness, 0.6),
            ],
        );
        let gamma = compute_frequencies(&b, GammaDenominator::RetainedCount);
        assert!((gamma[EmotionLabel::Happiness.pos()] - 1.7 / 3.0).abs() < 1e-12);
        assert!((gamma[EmotionLabel::Sadness.pos()] - 0.2).abs() < 1e-12);
        let rest: f64 = EmotionLabel::ALL
            .iter()
            .filter(|l| !matches!(l, EmotionLabel::Happiness | EmotionLabel::Sadness))
            .map(|l| gamma[l.pos()])
            .sum();
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn unanimous_unit_confidence_sums_to_one() {
        let b = batch(0, &[(EmotionLabel::Neutral, 1.0); 4]);
        let gamma = compute_frequencies(&b, GammaDenominator::RetainedCount);
        assert_eq!(gamma[EmotionLabel::Neutral.pos()], 1.0);
    }

    #[test]
    fn empty_batch_gives_zero_vector() {
        let gamma = compute_frequencies(&WindowBatch::empty(0), GammaDenominator::RetainedCount);
        assert_eq!(gamma, [0.0; EMOTION_COUNT]);
    }

    #[test]
    fn frame_count_denominator_uses_distinct_frames() {
        // Two faces on one frame: frame-count denominator is 1, so the
        // frequency exceeds what the detection-count reading gives.
        let mut b = batch(
            0,
            &[(EmotionLabel::Neutral, 1.0), (EmotionLabel::Neutral, 1.0)],
        );
        b.events[1].track_id = 1;
        let by_detections = compute_frequencies(&b, GammaDenominator::RetainedCount);
        let by_frames = compute_frequencies(&b, GammaDenominator::FrameCount);
        assert_eq!(by_detections[EmotionLabel::Neutral.pos()], 1.0);
        assert_eq!(by_frames[EmotionLabel::Neutral.pos()], 2.0);
    }

    #[test]
    fn raw_score_matches_hand_arithmetic() {
        let params = defaults();
        let mut gamma = [0.0; EMOTION_COUNT];
        gamma[EmotionLabel::Neutral.pos()] = 1.0;
        assert!((raw_score(&gamma, &params) - 0.5).abs() < 1e-12);

        let mut gamma = [0.0; EMOTION_COUNT];
        gamma[EmotionLabel::Fear.pos()] = 1.0;
        assert!((raw_score(&gamma, &params) - 0.9).abs() < 1e-12);

        assert_eq!(raw_score(&[0.0; EMOTION_COUNT], &params), 0.0);
    }

    #[test]
    fn variance_penalty_hand_example() {
        let params = defaults();
        let mut state = EmaState::new();
        state.push_raw(0.5, params.variance_window);
        assert!((variance_regularize(0.5, &state, &params) - 0.5).abs() < 1e-12);
        state.push_raw(0.6, params.variance_window);
        state.push_raw(0.55, params.variance_window);
        let a_star = variance_regularize(0.55, &state, &params);
        assert!((a_star - (0.55 - 0.1 * (0.005 / 3.0))).abs() < 1e-9);
        assert!((a_star - 0.5498333).abs() < 1e-6);
    }

    #[test]
    fn zero_lambda_disables_regularization() {
        let mut params = defaults();
        params.lambda_reg = 0.0;
        let mut state = EmaState::new();
        for psi in [0.1, 0.9, 0.4] {
            state.push_raw(psi, params.variance_window);
        }
        assert_eq!(variance_regularize(0.4, &state, &params), 0.4);
    }

    #[test]
    fn history_is_bounded_by_variance_window() {
        let mut state = EmaState::new();
        for i in 0..10 {
            state.push_raw(i as f64, 5);
        }
        assert_eq!(state.history.len(), 5);
        assert_eq!(state.history.front(), Some(&5.0));
    }

    #[test]
    fn ema_base_case_and_step() {
        let params = defaults();
        let mut state = EmaState::new();
        assert_eq!(ema_update(0.5, &mut state, &params), 0.5);
        let next = ema_update(0.6, &mut state, &params);
        assert!((next - 0.53).abs() < 1e-12);
    }

    #[test]
    fn ema_alpha_zero_tracks_input() {
        let mut params = defaults();
        params.alpha = 0.0;
        let mut state = EmaState::new();
        ema_update(0.5, &mut state, &params);
        assert_eq!(ema_update(0.8, &mut state, &params), 0.8);
    }

    #[test]
    fn aggregation_hand_examples() {
        let mut params = defaults();
        params.delta = 0.0;
        assert!((aggregate_session(&[0.5, 0.6], &params).unwrap() - 0.55).abs() < 1e-12);

        params.delta = 0.05;
        let value = aggregate_session(&[0.5, 0.6], &params).unwrap();
        assert!((value - 1.13 / 2.05).abs() < 1e-12);
        assert!((value - 0.55122).abs() < 1e-5);

        assert_eq!(aggregate_session(&[0.7], &params).unwrap(), 0.7);
        assert_eq!(aggregate_session(&[], &params), Err(EngineError::NoWindows));
    }

    #[test]
    fn classification_of_reference_scores() {
        let params = defaults();
        assert_eq!(
            classify_state(0.532, &params),
            EngagementState::AttentiveListening
        );
        assert_eq!(
            classify_state(0.597, &params),
            EngagementState::ActiveParticipation
        );
        assert_eq!(
            classify_state(0.623, &params),
            EngagementState::PassivePresence
        );
        assert_eq!(classify_state(0.742, &params), EngagementState::Disengaged);
    }

    #[test]
    fn first_window_all_neutral() {
        let mut engine = Engine::new(defaults());
        let agg = engine
            .process_window(&batch(0, &[(EmotionLabel::Neutral, 1.0); 3]))
            .unwrap();
        assert_eq!(agg.psi, Some(0.5));
        assert_eq!(agg.a_star, Some(0.5));
        assert_eq!(agg.a_smooth, Some(0.5));
        assert_eq!(agg.state_hint, Some(EngagementState::AttentiveListening));
    }

    #[test]
    fn empty_window_holds_previous_score() {
        let mut engine = Engine::new(defaults());
        engine
            .process_window(&batch(0, &[(EmotionLabel::Fear, 1.0); 2]))
            .unwrap();
        let empty = engine.process_window(&WindowBatch::empty(1)).unwrap();
        assert_eq!(empty.psi, None);
        assert_eq!(empty.a_star, None);
        assert_eq!(empty.a_smooth, Some(0.9));
        assert_eq!(empty.state_hint, Some(EngagementState::Disengaged));
    }

    #[test]
    fn leading_empty_window_has_no_score() {
        let mut engine = Engine::new(defaults());
        let agg = engine.process_window(&WindowBatch::empty(0)).unwrap();
        assert_eq!(agg.a_smooth, None);
        assert_eq!(agg.state_hint, None);
    }

    #[test]
    fn duplicate_window_rejected() {
        let mut engine = Engine::new(defaults());
        engine.process_window(&WindowBatch::empty(0)).unwrap();
        assert_eq!(
            engine.process_window(&WindowBatch::empty(0)),
            Err(EngineError::OutOfOrderWindow {
                expected: 1,
                got: 0
            })
        );
    }

    #[test]
    fn single_fear_window_session() {
        let report = run_session(&[batch(0, &[(EmotionLabel::Fear, 1.0); 5])], &defaults()).unwrap();
        assert!((report.lambda_star - 0.9).abs() < 1e-12);
        assert_eq!(report.final_state, EngagementState::Disengaged);
    }

    #[test]
    fn constant_stream_is_a_fixed_point() {
        let batches: Vec<WindowBatch> = (0..10)
            .map(|i| batch(i, &[(EmotionLabel::Neutral, 1.0); 4]))
            .collect();
        let report = run_session(&batches, &defaults()).unwrap();
        assert!((report.lambda_star - 0.5).abs() < 1e-12);
        assert_eq!(report.transition_count, 0);
    }

    #[test]
    fn empty_session_errors() {
        assert_eq!(run_session(&[], &defaults()), Err(EngineError::NoWindows));
    }
}
