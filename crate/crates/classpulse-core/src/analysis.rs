//! Evaluation and robustness analyses: classification metrics, weight and
//! threshold perturbation sweeps, emotion ablation, and the score-smoothing
//! ablation.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::calibration::{find_thresholds, score_gamma_sequence, LabeledSegment};
use crate::emotion::{EmotionLabel, EMOTION_COUNT};
use crate::engine::run_session;
use crate::params::{EngineParams, Thresholds};
use crate::state::EngagementState;
use crate::window::{SessionReport, WindowBatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisError {
    EmptyInput,
    ThresholdOrderingViolated,
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::EmptyInput => write!(f, "no predictions to score"),
            AnalysisError::ThresholdOrderingViolated => write!(f, "threshold ordering violated"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AnalysisError {}

/// Standard multi-class metrics plus ordinal-distance errors.
///
/// Rows of the confusion matrix are the true state, columns the predicted
/// state; MSE and MAE are computed on the ordinal encoding (attentive 0
/// through disengaged 3).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub mse: f64,
    pub mae: f64,
    pub confusion: [[u64; 4]; 4],
}

impl ClassificationMetrics {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Per-state recall, 0 when the state has no support.
    pub fn recall(&self, state: EngagementState) -> f64 {
        let row = &self.confusion[state.ordinal() as usize];
        let support: u64 = row.iter().sum();
        if support == 0 {
            0.0
        } else {
            row[state.ordinal() as usize] as f64 / support as f64
        }
    }
}

/// Scores (predicted, truth) pairs.
pub fn score_predictions(
    pairs: &[(EngagementState, EngagementState)],
) -> Result<ClassificationMetrics, AnalysisError> {
    if pairs.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut confusion = [[0u64; 4]; 4];
    let mut sq = 0.0;
    let mut abs = 0.0;
    for &(predicted, truth) in pairs {
        confusion[truth.ordinal() as usize][predicted.ordinal() as usize] += 1;
        let d = predicted.ordinal() as f64 - truth.ordinal() as f64;
        sq += d * d;
        abs += d.abs();
    }
    let n = pairs.len() as f64;
    let mut precision_sum = 0.0;
    let mut recall_sum = 0.0;
    let mut f1_sum = 0.0;
    let mut trace = 0u64;
    for c in 0..4 {
        let tp = confusion[c][c];
        trace += tp;
        let support: u64 = confusion[c].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
        let precision = if predicted == 0 {
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if support == 0 {
            0.0
        } else {
            tp as f64 / support as f64
        };
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
    }
    Ok(ClassificationMetrics {
        accuracy: trace as f64 / n,
        macro_precision: precision_sum / 4.0,
        macro_recall: recall_sum / 4.0,
        macro_f1: f1_sum / 4.0,
        mse: sq / n,
        mae: abs / n,
        confusion,
    })
}

/// Classifies every segment under the given parameters.
pub fn predict_segments(
    segments: &[LabeledSegment],
    params: &EngineParams,
) -> Vec<(EngagementState, EngagementState)> {
    segments
        .iter()
        .map(|s| {
            (
                params.classify(score_gamma_sequence(&s.gamma_sequence, params)),
                s.truth,
            )
        })
        .collect()
}

fn corpus_metrics(
    segments: &[LabeledSegment],
    params: &EngineParams,
) -> Result<ClassificationMetrics, AnalysisError> {
    score_predictions(&predict_segments(segments, params))
}

/// Accuracy sensitivity of one emotion weight under scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightPerturbation {
    pub emotion: EmotionLabel,
    pub accuracy_up: f64,
    pub accuracy_down: f64,
    /// Largest absolute accuracy change across the two directions.
    pub max_abs_delta: f64,
}

/// Sweep result over all seven emotion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightPerturbationSweep {
    pub baseline_accuracy: f64,
    pub fraction: f64,
    pub per_emotion: Vec<WeightPerturbation>,
}

/// Re-evaluates corpus accuracy with each emotion weight scaled by
/// `1 ± fraction` in turn (others fixed, thresholds unchanged). Scaled
/// weights are capped at 1.
pub fn perturb_weights(
    segments: &[LabeledSegment],
    params: &EngineParams,
    fraction: f64,
) -> Result<WeightPerturbationSweep, AnalysisError> {
    let baseline = corpus_metrics(segments, params)?.accuracy;
    let mut per_emotion = Vec::with_capacity(EMOTION_COUNT);
    for emotion in EmotionLabel::ALL {
        let mut accuracy = [0.0; 2];
        for (slot, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let mut perturbed = params.clone();
            let scaled = (params.beta.get(emotion) * (1.0 + sign * fraction)).min(1.0);
            perturbed.beta.set(emotion, scaled);
            accuracy[slot] = corpus_metrics(segments, &perturbed)?.accuracy;
        }
        per_emotion.push(WeightPerturbation {
            emotion,
            accuracy_up: accuracy[0],
            accuracy_down: accuracy[1],
            max_abs_delta: (accuracy[0] - baseline)
                .abs()
                .max((accuracy[1] - baseline).abs()),
        });
    }
    Ok(WeightPerturbationSweep {
        baseline_accuracy: baseline,
        fraction,
        per_emotion,
    })
}

/// Accuracy of one shifted threshold variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdShift {
    pub thresholds: Thresholds,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPerturbationSweep {
    pub baseline_accuracy: f64,
    pub eps: f64,
    pub shifts: Vec<ThresholdShift>,
}

/// Evaluates accuracy with the thresholds shifted by `±eps`: the whole
/// triple together and each split individually. Errors if any shifted
/// variant stops being strictly increasing.
pub fn perturb_thresholds(
    segments: &[LabeledSegment],
    params: &EngineParams,
    eps: f64,
) -> Result<ThresholdPerturbationSweep, AnalysisError> {
    let baseline = corpus_metrics(segments, params)?.accuracy;
    let t = params.thresholds;
    let mut variants = alloc::vec![t.shifted(eps), t.shifted(-eps)];
    for idx in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = t;
            match idx {
                0 => v.0 += sign * eps,
                1 => v.1 += sign * eps,
                _ => v.2 += sign * eps,
            }
            variants.push(v);
        }
    }
    let mut shifts = Vec::with_capacity(variants.len());
    for thresholds in variants {
        if !thresholds.is_strictly_increasing() {
            return Err(AnalysisError::ThresholdOrderingViolated);
        }
        let mut shifted = params.clone();
        shifted.thresholds = thresholds;
        shifts.push(ThresholdShift {
            thresholds,
            accuracy: corpus_metrics(segments, &shifted)?.accuracy,
        });
    }
    Ok(ThresholdPerturbationSweep {
        baseline_accuracy: baseline,
        eps,
        shifts,
    })
}

/// Effect of removing one emotion from the scoring function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub emotion: EmotionLabel,
    pub baseline: ClassificationMetrics,
    pub ablated: ClassificationMetrics,
    /// Accuracy reduction (baseline minus ablated).
    pub accuracy_drop: f64,
}

fn zero_emotion(segments: &[LabeledSegment], emotion: EmotionLabel) -> Vec<LabeledSegment> {
    segments
        .iter()
        .map(|s| {
            let mut out = s.clone();
            for gamma in &mut out.gamma_sequence {
                gamma[emotion.pos()] = 0.0;
            }
            out
        })
        .collect()
}

/// Removes one emotion's frequency contribution (zeroed, not
/// renormalized) and re-evaluates the corpus.
///
/// With `refit_thresholds`, splits are re-derived on the ablated scores
/// before evaluation; removing an emotion shifts the whole score scale, so
/// refitting isolates the information loss from the scale shift.
pub fn ablate_emotion(
    segments: &[LabeledSegment],
    params: &EngineParams,
    emotion: EmotionLabel,
    refit_thresholds: bool,
) -> Result<AblationResult, AnalysisError> {
    let baseline = corpus_metrics(segments, params)?;
    let ablated_segments = zero_emotion(segments, emotion);
    let mut ablated_params = params.clone();
    if refit_thresholds {
        let scores: Vec<(f64, EngagementState)> = ablated_segments
            .iter()
            .map(|s| (score_gamma_sequence(&s.gamma_sequence, params), s.truth))
            .collect();
        if let Ok(thresholds) = find_thresholds(&scores) {
            ablated_params.thresholds = thresholds;
        }
    }
    let ablated = corpus_metrics(&ablated_segments, &ablated_params)?;
    Ok(AblationResult {
        emotion,
        accuracy_drop: baseline.accuracy - ablated.accuracy,
        baseline,
        ablated,
    })
}

/// Runs the ablation for every emotion, ranked by accuracy drop.
pub fn ablation_sweep(
    segments: &[LabeledSegment],
    params: &EngineParams,
    refit_thresholds: bool,
) -> Result<Vec<AblationResult>, AnalysisError> {
    let mut results = Vec::with_capacity(EMOTION_COUNT);
    for emotion in EmotionLabel::ALL {
        results.push(ablate_emotion(segments, params, emotion, refit_thresholds)?);
    }
    results.sort_by(|a, b| b.accuracy_drop.partial_cmp(&a.accuracy_drop).unwrap());
    Ok(results)
}

/// Paired run of the engine with smoothing disabled versus configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingAblation {
    pub raw_transitions: usize,
    pub smoothed_transitions: usize,
    /// `1 - smoothed/raw`; 0 when the raw run has no transitions.
    pub reduction_ratio: f64,
    pub raw_report: SessionReport,
    pub smoothed_report: SessionReport,
}

/// Runs the identical window stream twice, once with the variance penalty
/// and EMA turned off and once as configured, and compares per-window
/// state transition counts.
pub fn smoothing_ablation(
    batches: &[WindowBatch],
    params: &EngineParams,
) -> Result<SmoothingAblation, AnalysisError> {
    let mut raw_params = params.clone();
    raw_params.lambda_reg = 0.0;
    raw_params.alpha = 0.0;
    let raw_report = run_session(batches, &raw_params).map_err(|_| AnalysisError::EmptyInput)?;
    let smoothed_report = run_session(batches, params).map_err(|_| AnalysisError::EmptyInput)?;
    let raw_transitions = raw_report.transition_count;
    let smoothed_transitions = smoothed_report.transition_count;
    let reduction_ratio = if raw_transitions == 0 {
        0.0
    } else {
        1.0 - smoothed_transitions as f64 / raw_transitions as f64
    };
    Ok(SmoothingAblation {
        raw_transitions,
        smoothed_transitions,
        reduction_ratio,
        raw_report,
        smoothed_report,
    })
}
