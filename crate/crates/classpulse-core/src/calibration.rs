//! Weight calibration by exhaustive grid search with an F1 objective plus
//! k-fold cross-validation, and threshold derivation by optimal ordinal
//! split search over session scores.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::emotion::{EmotionLabel, EMOTION_COUNT};
use crate::engine::{aggregate_session, ema_update, raw_score, variance_regularize, EmaState};
use crate::params::{BetaWeights, EngineParams, Thresholds};
use crate::state::EngagementState;

/// One ground-truth-annotated segment, reduced to its per-window frequency
/// vectors. Frequencies do not depend on the weights, so a corpus can be
/// aggregated once and re-scored under thousands of candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSegment {
    pub gamma_sequence: Vec<[f64; EMOTION_COUNT]>,
    pub truth: EngagementState,
}

/// Per-emotion candidate value lists for the weight grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCandidateGrid {
    pub values: [Vec<f64>; EMOTION_COUNT],
}

fn band(center: f64) -> Vec<f64> {
    (-2i32..=2).map(|k| center + 0.05 * k as f64).collect()
}

impl Default for WeightCandidateGrid {
    /// Neutral pinned to its baseline 0.5; each other emotion gets a
    /// five-value band at step 0.05 around its theory prior, all inside
    /// [0.1, 1.0]. Positive-emotion bands stay at or above 0.5 and below
    /// the negative-emotion bands.
    fn default() -> Self {
        let mut values: [Vec<f64>; EMOTION_COUNT] = Default::default();
        values[EmotionLabel::Neutral.pos()] = alloc::vec![0.5];
        values[EmotionLabel::Happiness.pos()] = band(0.65);
        values[EmotionLabel::Surprise.pos()] = band(0.65);
        values[EmotionLabel::Sadness.pos()] = band(0.75);
        values[EmotionLabel::Anger.pos()] = band(0.85);
        values[EmotionLabel::Disgust.pos()] = band(0.85);
        values[EmotionLabel::Fear.pos()] = band(0.85);
        WeightCandidateGrid { values }
    }
}

impl WeightCandidateGrid {
    pub fn combination_count(&self) -> usize {
        self.values.iter().map(|v| v.len()).product()
    }

    /// Enumerates every combination in lexicographic emotion-index order.
    pub fn candidates(&self) -> Vec<BetaWeights> {
        let mut out = Vec::with_capacity(self.combination_count());
        let mut current = [0.0; EMOTION_COUNT];
        self.expand(0, &mut current, &mut out);
        out
    }

    fn expand(&self, pos: usize, current: &mut [f64; EMOTION_COUNT], out: &mut Vec<BetaWeights>) {
        if pos == EMOTION_COUNT {
            out.push(BetaWeights(*current));
            return;
        }
        for &v in &self.values[pos] {
            current[pos] = v;
            self.expand(pos + 1, current, out);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationError {
    EmptySegments,
    StateAbsent(EngagementState),
    TooFewDistinctScores,
    TooFewSegmentsForFolds { segments: usize, folds: usize },
    BadFoldCount,
    EmptyGrid,
}

impl fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CalibrationError::EmptySegments => write!(f, "no labeled segments"),
            CalibrationError::StateAbsent(s) => {
                write!(f, "state {} absent from the score set", s.name())
            }
            CalibrationError::TooFewDistinctScores => {
                write!(f, "need at least four distinct scores to place three splits")
            }
            CalibrationError::TooFewSegmentsForFolds { segments, folds } => {
                write!(f, "{segments} segments cannot fill {folds} folds")
            }
            CalibrationError::BadFoldCount => write!(f, "fold count must be at least 2"),
            CalibrationError::EmptyGrid => write!(f, "candidate grid is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CalibrationError {}

/// Session score of a precomputed frequency sequence under the given
/// parameters; the exact pipeline the engine applies to live windows.
pub fn score_gamma_sequence(gammas: &[[f64; EMOTION_COUNT]], params: &EngineParams) -> f64 {
    let mut state = EmaState::new();
    let mut smoothed = Vec::with_capacity(gammas.len());
    for gamma in gammas {
        let psi = raw_score(gamma, params);
        state.push_raw(psi, params.variance_window);
        let a_star = variance_regularize(psi, &state, params);
        smoothed.push(ema_update(a_star, &mut state, params));
    }
    aggregate_session(&smoothed, params).unwrap_or(0.0)
}

/// Macro-F1 evaluation of one weight candidate over a labeled corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEvaluation {
    pub beta: BetaWeights,
    pub per_state_f1: [f64; 4],
    pub mean_f1: f64,
    pub accuracy: f64,
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Scores every segment with the candidate weights and fixed thresholds,
/// then reports per-state F1, their uniform mean, and plain accuracy.
pub fn evaluate_weights(
    beta: BetaWeights,
    segments: &[LabeledSegment],
    params_template: &EngineParams,
    thresholds: Thresholds,
) -> Result<WeightEvaluation, CalibrationError> {
    if segments.is_empty() {
        return Err(CalibrationError::EmptySegments);
    }
    let mut params = params_template.clone();
    params.beta = beta;
    params.thresholds = thresholds;

    let mut tp = [0usize; 4];
    let mut fp = [0usize; 4];
    let mut fn_ = [0usize; 4];
    let mut correct = 0usize;
    for segment in segments {
        let predicted = params.classify(score_gamma_sequence(&segment.gamma_sequence, &params));
        if predicted == segment.truth {
            tp[predicted.ordinal() as usize] += 1;
            correct += 1;
        } else {
            fp[predicted.ordinal() as usize] += 1;
            fn_[segment.truth.ordinal() as usize] += 1;
        }
    }
    let mut per_state_f1 = [0.0; 4];
    for i in 0..4 {
        per_state_f1[i] = f1_from_counts(tp[i], fp[i], fn_[i]);
    }
    Ok(WeightEvaluation {
        beta,
        per_state_f1,
        mean_f1: per_state_f1.iter().sum::<f64>() / 4.0,
        accuracy: correct as f64 / segments.len() as f64,
    })
}

fn beta_lex_less(a: &BetaWeights, b: &BetaWeights) -> bool {
    for i in 0..EMOTION_COUNT {
        if a.0[i] != b.0[i] {
            return a.0[i] < b.0[i];
        }
    }
    false
}

/// Exhaustively evaluates the grid and ranks candidates by mean F1,
/// breaking ties toward the lexicographically smaller weight vector.
/// Returns the ranked evaluations and the exact evaluation count.
pub fn grid_search_weights(
    grid: &WeightCandidateGrid,
    segments: &[LabeledSegment],
    params_template: &EngineParams,
    thresholds: Thresholds,
) -> Result<(Vec<WeightEvaluation>, usize), CalibrationError> {
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(CalibrationError::EmptyGrid);
    }
    let mut evaluations = Vec::with_capacity(candidates.len());
    for beta in candidates {
        evaluations.push(evaluate_weights(beta, segments, params_template, thresholds)?);
    }
    let count = evaluations.len();
    evaluations.sort_by(|a, b| {
        b.mean_f1
            .partial_cmp(&a.mean_f1)
            .unwrap()
            .then_with(|| {
                if beta_lex_less(&a.beta, &b.beta) {
                    core::cmp::Ordering::Less
                } else if beta_lex_less(&b.beta, &a.beta) {
                    core::cmp::Ordering::Greater
                } else {
                    core::cmp::Ordering::Equal
                }
            })
    });
    Ok((evaluations, count))
}

/// Cross-validation outcome for the winning candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvResult {
    pub beta: BetaWeights,
    pub mean_f1: f64,
}

/// Picks, among the shortlisted candidates, the one with the best mean
/// held-out macro F1 under a seeded k-fold split.
pub fn cross_validate(
    candidates: &[BetaWeights],
    segments: &[LabeledSegment],
    folds: usize,
    seed: u64,
    params_template: &EngineParams,
    thresholds: Thresholds,
) -> Result<CvResult, CalibrationError> {
    if folds < 2 {
        return Err(CalibrationError::BadFoldCount);
    }
    if segments.len() < folds {
        return Err(CalibrationError::TooFewSegmentsForFolds {
            segments: segments.len(),
            folds,
        });
    }
    if candidates.is_empty() {
        return Err(CalibrationError::EmptyGrid);
    }

    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let fold_of: Vec<usize> = {
        let mut fold_of = alloc::vec![0usize; segments.len()];
        for (rank, &idx) in order.iter().enumerate() {
            fold_of[idx] = rank % folds;
        }
        fold_of
    };

    let mut best: Option<CvResult> = None;
    for &beta in candidates {
        let mut total = 0.0;
        for fold in 0..folds {
            let held_out: Vec<LabeledSegment> = segments
                .iter()
                .enumerate()
                .filter(|(i, _)| fold_of[*i] == fold)
                .map(|(_, s)| s.clone())
                .collect();
            total += evaluate_weights(beta, &held_out, params_template, thresholds)?.mean_f1;
        }
        let mean_f1 = total / folds as f64;
        let better = match &best {
            None => true,
            Some(b) => mean_f1 > b.mean_f1 || (mean_f1 == b.mean_f1 && beta_lex_less(&beta, &b.beta)),
        };
        if better {
            best = Some(CvResult { beta, mean_f1 });
        }
    }
    Ok(best.unwrap())
}

/// Winner of a joint weight-and-threshold calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCalibration {
    pub beta: BetaWeights,
    pub thresholds: Thresholds,
    pub mean_f1: f64,
    pub accuracy: f64,
    /// Number of candidates actually evaluated, including those skipped
    /// because their score sets could not support three splits.
    pub evaluation_count: usize,
}

/// Grid search where each candidate gets its own accuracy-optimal
/// thresholds fitted on the scores it induces, rather than a fixed triple.
///
/// Candidates whose score sets cannot support a strictly increasing split
/// triple are skipped. The winner has the best mean F1 under its fitted
/// thresholds; ties break toward the lexicographically smaller weights.
pub fn calibrate_weights_and_thresholds(
    grid: &WeightCandidateGrid,
    segments: &[LabeledSegment],
    params_template: &EngineParams,
) -> Result<JointCalibration, CalibrationError> {
    if segments.is_empty() {
        return Err(CalibrationError::EmptySegments);
    }
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(CalibrationError::EmptyGrid);
    }
    let evaluation_count = candidates.len();
    let mut best: Option<JointCalibration> = None;
    let mut scored = Vec::with_capacity(segments.len());
    for beta in candidates {
        let mut params = params_template.clone();
        params.beta = beta;
        scored.clear();
        scored.extend(segments.iter().map(|segment| {
            (
                score_gamma_sequence(&segment.gamma_sequence, &params),
                segment.truth,
            )
        }));
        let Ok(thresholds) = find_thresholds(&scored) else {
            continue;
        };
        let eval = evaluate_weights(beta, segments, params_template, thresholds)?;
        let better = match &best {
            None => true,
            Some(b) => {
                eval.mean_f1 > b.mean_f1
                    || (eval.mean_f1 == b.mean_f1 && beta_lex_less(&beta, &b.beta))
            }
        };
        if better {
            best = Some(JointCalibration {
                beta,
                thresholds,
                mean_f1: eval.mean_f1,
                accuracy: eval.accuracy,
                evaluation_count,
            });
        }
    }
    best.ok_or(CalibrationError::TooFewDistinctScores)
}

/// Finds the accuracy-optimal strictly increasing split triple over scored
/// sessions, scanning midpoints between adjacent distinct sorted scores.
/// Ties break toward the lexicographically lowest thresholds.
pub fn find_thresholds(
    scores: &[(f64, EngagementState)],
) -> Result<Thresholds, CalibrationError> {
    for state in EngagementState::ALL {
        if !scores.iter().any(|(_, s)| *s == state) {
            return Err(CalibrationError::StateAbsent(state));
        }
    }
    let mut sorted: Vec<(f64, EngagementState)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = sorted.len();

    // Cut positions sit between adjacent distinct score values; cutting at
    // position p splits [0, p) from [p, n).
    let cuts: Vec<usize> = (1..n).filter(|&p| sorted[p - 1].0 < sorted[p].0).collect();
    if cuts.len() < 3 {
        return Err(CalibrationError::TooFewDistinctScores);
    }

    // prefix[c][p] = how many of the first p scores belong to state c.
    let mut prefix = [(); 4].map(|_| alloc::vec![0i64; n + 1]);
    for (p, (_, state)) in sorted.iter().enumerate() {
        for c in 0..4 {
            prefix[c][p + 1] = prefix[c][p] + i64::from(state.ordinal() as usize == c);
        }
    }

    // Correct count for cuts (i, j, k) separates into per-cut terms:
    //   att[0,ci) + act[ci,cj) + pass[cj,ck) + dis[ck,n)
    //   = (A-B)(ci) + (B-C)(cj) + (C-D)(ck) + D(n)
    // so each split optimizes independently given the order constraint.
    let m = cuts.len();
    let f = |i: usize| prefix[0][cuts[i]] - prefix[1][cuts[i]];
    let g = |j: usize| prefix[1][cuts[j]] - prefix[2][cuts[j]];
    let h = |k: usize| prefix[2][cuts[k]] - prefix[3][cuts[k]];

    // Suffix maxima, keeping the leftmost maximizer so ties resolve to the
    // lowest thresholds.
    let mut best_h = alloc::vec![i64::MIN; m + 1];
    for k in (2..m).rev() {
        best_h[k] = best_h[k + 1].max(h(k));
    }
    let mut best_gh = alloc::vec![i64::MIN; m + 1];
    for j in (1..m - 1).rev() {
        best_gh[j] = best_gh[j + 1].max(g(j) + best_h[j + 1]);
    }

    let mut i = 0;
    let mut i_val = i64::MIN;
    for cand in 0..m - 2 {
        let val = f(cand) + best_gh[cand + 1];
        if val > i_val {
            i_val = val;
            i = cand;
        }
    }
    let mut j = i + 1;
    let mut j_val = i64::MIN;
    for cand in (i + 1)..m - 1 {
        let val = g(cand) + best_h[cand + 1];
        if val > j_val {
            j_val = val;
            j = cand;
        }
    }
    let mut k = j + 1;
    let mut k_val = i64::MIN;
    for cand in (j + 1)..m {
        let val = h(cand);
        if val > k_val {
            k_val = val;
            k = cand;
        }
    }

    let midpoint = |p: usize| (sorted[p - 1].0 + sorted[p].0) / 2.0;
    Ok(Thresholds(midpoint(cuts[i]), midpoint(cuts[j]), midpoint(cuts[k])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma_of(label: EmotionLabel, value: f64) -> [f64; EMOTION_COUNT] {
        let mut g = [0.0; EMOTION_COUNT];
        g[label.pos()] = value;
        g
    }

    fn defaults() -> EngineParams {
        EngineParams::default()
    }

    #[test]
    fn default_grid_has_published_size() {
        let grid = WeightCandidateGrid::default();
        assert_eq!(grid.combination_count(), 15_625);
        let candidates = grid.candidates();
        assert_eq!(candidates.len(), 15_625);
        // Neutral pinned, every candidate in range.
        for c in &candidates {
            assert_eq!(c.get(EmotionLabel::Neutral), 0.5);
            assert!(c.0.iter().all(|&v| (0.1..=1.0).contains(&v)));
        }
        // The recommended weights sit on the grid.
        let recommended = BetaWeights::recommended();
        assert!(candidates
            .iter()
            .any(|c| c.0.iter().zip(&recommended.0).all(|(a, b)| (a - b).abs() < 1e-9)));
    }

    #[test]
    fn singleton_grid_ranks_its_candidate_first() {
        let mut grid = WeightCandidateGrid::default();
        for v in &mut grid.values {
            v.truncate(1);
        }
        let segments = alloc::vec![LabeledSegment {
            gamma_sequence: alloc::vec![gamma_of(EmotionLabel::Neutral, 1.0)],
            truth: EngagementState::AttentiveListening,
        }];
        let (ranked, count) =
            grid_search_weights(&grid, &segments, &defaults(), defaults().thresholds).unwrap();
        assert_eq!(count, 1);
        assert_eq!(ranked[0].beta.get(EmotionLabel::Neutral), 0.5);
    }

    #[test]
    fn perfect_segment_scores_f1_one() {
        // Pure neutral scores 0.5, below t1: attentive.
        let segments = alloc::vec![LabeledSegment {
            gamma_sequence: alloc::vec![gamma_of(EmotionLabel::Neutral, 1.0); 3],
            truth: EngagementState::AttentiveListening,
        }];
        let eval = evaluate_weights(
            BetaWeights::recommended(),
            &segments,
            &defaults(),
            defaults().thresholds,
        )
        .unwrap();
        assert_eq!(eval.per_state_f1[0], 1.0);
        assert_eq!(eval.accuracy, 1.0);
    }

    #[test]
    fn empty_segment_list_errors() {
        assert_eq!(
            evaluate_weights(
                BetaWeights::recommended(),
                &[],
                &defaults(),
                defaults().thresholds
            )
            .unwrap_err(),
            CalibrationError::EmptySegments
        );
    }

    #[test]
    fn identical_segments_make_cv_equal_full_data() {
        let segment = LabeledSegment {
            gamma_sequence: alloc::vec![gamma_of(EmotionLabel::Fear, 1.0); 2],
            truth: EngagementState::Disengaged,
        };
        let segments = alloc::vec![segment; 10];
        let beta = BetaWeights::recommended();
        let cv = cross_validate(&[beta], &segments, 5, 7, &defaults(), defaults().thresholds)
            .unwrap();
        let full = evaluate_weights(beta, &segments, &defaults(), defaults().thresholds).unwrap();
        assert!((cv.mean_f1 - full.mean_f1).abs() < 1e-12);
    }

    #[test]
    fn cv_rejects_too_few_segments() {
        let segment = LabeledSegment {
            gamma_sequence: alloc::vec![gamma_of(EmotionLabel::Neutral, 1.0)],
            truth: EngagementState::AttentiveListening,
        };
        let err = cross_validate(
            &[BetaWeights::recommended()],
            &alloc::vec![segment; 3],
            5,
            1,
            &defaults(),
            defaults().thresholds,
        )
        .unwrap_err();
        assert_eq!(
            err,
            CalibrationError::TooFewSegmentsForFolds {
                segments: 3,
                folds: 5
            }
        );
    }

    #[test]
    fn separable_clusters_split_with_zero_error() {
        use EngagementState::*;
        let mut scores = Vec::new();
        for (base, state) in [
            (0.50, AttentiveListening),
            (0.60, ActiveParticipation),
            (0.70, PassivePresence),
            (0.80, Disengaged),
        ] {
            for k in 0..10 {
                scores.push((base + 0.001 * k as f64, state));
            }
        }
        let t = find_thresholds(&scores).unwrap();
        assert!(t.is_strictly_increasing());
        // Every training score classifies correctly under the splits.
        for &(score, state) in &scores {
            let predicted = if score < t.0 {
                AttentiveListening
            } else if score < t.1 {
                ActiveParticipation
            } else if score < t.2 {
                PassivePresence
            } else {
                Disengaged
            };
            assert_eq!(predicted, state);
        }
    }

    #[test]
    fn absent_state_is_named() {
        use EngagementState::*;
        let scores = alloc::vec![
            (0.5, AttentiveListening),
            (0.6, ActiveParticipation),
            (0.8, Disengaged),
        ];
        assert_eq!(
            find_thresholds(&scores).unwrap_err(),
            CalibrationError::StateAbsent(PassivePresence)
        );
    }

    #[test]
    fn duplicating_scores_leaves_thresholds_unchanged() {
        use EngagementState::*;
        let scores = alloc::vec![
            (0.50, AttentiveListening),
            (0.55, AttentiveListening),
            (0.59, ActiveParticipation),
            (0.62, PassivePresence),
            (0.63, PassivePresence),
            (0.70, Disengaged),
            (0.80, Disengaged),
        ];
        let once = find_thresholds(&scores).unwrap();
        let mut doubled = scores.clone();
        doubled.extend_from_slice(&scores);
        let twice = find_thresholds(&doubled).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn interleaved_states_still_deterministic() {
        use EngagementState::*;
        let scores = alloc::vec![
            (0.50, ActiveParticipation),
            (0.52, AttentiveListening),
            (0.54, AttentiveListening),
            (0.56, ActiveParticipation),
            (0.60, PassivePresence),
            (0.61, ActiveParticipation),
            (0.66, Disengaged),
            (0.68, PassivePresence),
            (0.72, Disengaged),
        ];
        let a = find_thresholds(&scores).unwrap();
        let b = find_thresholds(&scores).unwrap();
        assert_eq!(a, b);
        assert!(a.is_strictly_increasing());
    }

    #[test]
    fn joint_calibration_separates_shifted_clusters() {
        use EngagementState::*;
        // Fear exposure orders the clusters, but every score sits far below
        // the default thresholds, so fixed-threshold search cannot separate
        // them while per-candidate fitting classifies all of them.
        let mut segments = Vec::new();
        for (fear, truth) in [
            (0.05, AttentiveListening),
            (0.15, ActiveParticipation),
            (0.25, PassivePresence),
            (0.35, Disengaged),
        ] {
            for k in 0..5 {
                let mut g = gamma_of(EmotionLabel::Fear, fear + 0.002 * k as f64);
                g[EmotionLabel::Neutral.pos()] = 0.3;
                segments.push(LabeledSegment {
                    gamma_sequence: alloc::vec![g; 2],
                    truth,
                });
            }
        }
        let grid = WeightCandidateGrid::default();
        let joint = calibrate_weights_and_thresholds(&grid, &segments, &defaults()).unwrap();
        assert_eq!(joint.evaluation_count, 15_625);
        assert_eq!(joint.accuracy, 1.0);
        assert_eq!(joint.mean_f1, 1.0);
        assert!(joint.thresholds.is_strictly_increasing());
        // Fixed default thresholds cannot even distinguish the clusters.
        let (ranked, _) =
            grid_search_weights(&grid, &segments, &defaults(), defaults().thresholds).unwrap();
        assert!(ranked[0].mean_f1 < 1.0);
    }

    #[test]
    fn joint_calibration_tie_breaks_to_smallest_weights() {
        use EngagementState::*;
        // Any candidate separates these clusters perfectly, so the winner
        // must be the lexicographically smallest grid point.
        let mut segments = Vec::new();
        for (fear, truth) in [
            (0.1, AttentiveListening),
            (0.3, ActiveParticipation),
            (0.6, PassivePresence),
            (0.9, Disengaged),
        ] {
            segments.push(LabeledSegment {
                gamma_sequence: alloc::vec![gamma_of(EmotionLabel::Fear, fear); 1],
                truth,
            });
        }
        let grid = WeightCandidateGrid::default();
        let joint = calibrate_weights_and_thresholds(&grid, &segments, &defaults()).unwrap();
        let smallest = BetaWeights([0.5, 0.55, 0.55, 0.65, 0.75, 0.75, 0.75]);
        assert_eq!(joint.beta, smallest);
    }

    #[test]
    fn score_sequence_matches_hand_pipeline() {
        // Two all-neutral windows: psi 0.5 both, variance 0, EMA constant.
        let params = defaults();
        let gammas = alloc::vec![gamma_of(EmotionLabel::Neutral, 1.0); 2];
        assert!((score_gamma_sequence(&gammas, &params) - 0.5).abs() < 1e-12);
    }
}
