//! Deterministic classroom simulator: seeded detection-event streams drawn
//! from per-category emotion profiles, with optional classifier-confusion
//! noise.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::emotion::{EmotionLabel, EMOTION_COUNT};
use crate::event::{BBox, DetectionEvent};
use crate::state::EngagementState;

/// Emotion distribution a student in one engagement category emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryEmotionProfile {
    pub category: EngagementState,
    /// Probability per emotion, indexed in label order, summing to 1.
    pub distribution: [f64; EMOTION_COUNT],
}

impl CategoryEmotionProfile {
    pub fn validate(&self) -> Result<(), SynthError> {
        let sum: f64 = self.distribution.iter().sum();
        if self.distribution.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(SynthError::BadProfile(self.category));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> EmotionLabel {
        let mut roll: f64 = rng.gen();
        for label in EmotionLabel::ALL {
            let p = self.distribution[label.pos()];
            if roll < p {
                return label;
            }
            roll -= p;
        }
        // Rounding residue lands on the last label with mass.
        for label in EmotionLabel::ALL.iter().rev() {
            if self.distribution[label.pos()] > 0.0 {
                return *label;
            }
        }
        EmotionLabel::Neutral
    }
}

fn profile(category: EngagementState, entries: &[(EmotionLabel, f64)]) -> CategoryEmotionProfile {
    let mut distribution = [0.0; EMOTION_COUNT];
    for &(label, p) in entries {
        distribution[label.pos()] = p;
    }
    CategoryEmotionProfile {
        category,
        distribution,
    }
}

/// The built-in per-category emotion profiles, one per engagement state.
pub fn default_profiles() -> [CategoryEmotionProfile; 4] {
    use EmotionLabel::*;
    [
        profile(
            EngagementState::AttentiveListening,
            &[
                (Happiness, 0.30),
                (Surprise, 0.35),
                (Neutral, 0.30),
                (Sadness, 0.05),
            ],
        ),
        profile(
            EngagementState::ActiveParticipation,
            &[(Happiness, 0.65), (Surprise, 0.25), (Neutral, 0.10)],
        ),
        profile(
            EngagementState::PassivePresence,
            &[
                (Neutral, 0.65),
                (Happiness, 0.10),
                (Surprise, 0.15),
                (Sadness, 0.05),
                (Anger, 0.02),
                (Disgust, 0.03),
            ],
        ),
        profile(
            EngagementState::Disengaged,
            &[
                (Sadness, 0.35),
                (Anger, 0.20),
                (Disgust, 0.10),
                (Neutral, 0.20),
                (Surprise, 0.05),
                (Fear, 0.10),
            ],
        ),
    ]
}

fn profile_for(
    profiles: &[CategoryEmotionProfile; 4],
    category: EngagementState,
) -> &CategoryEmotionProfile {
    profiles
        .iter()
        .find(|p| p.category == category)
        .expect("profile set covers every category")
}

/// Fractions of students in each behavioral class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudentMix {
    pub active: f64,
    pub attentive: f64,
    pub passive: f64,
    pub disengaged: f64,
    pub student_count: u32,
}

impl StudentMix {
    pub fn new(active: f64, attentive: f64, passive: f64, disengaged: f64, student_count: u32) -> Self {
        StudentMix {
            active,
            attentive,
            passive,
            disengaged,
            student_count,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let parts = [self.active, self.attentive, self.passive, self.disengaged];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-9 || self.student_count == 0 {
            return Err(SynthError::BadMix);
        }
        Ok(())
    }

    /// Deterministic per-class student counts via cumulative rounding, so
    /// the counts always sum to `student_count`.
    fn class_counts(&self) -> [u32; 4] {
        let fractions = [self.active, self.attentive, self.passive, self.disengaged];
        let n = self.student_count as f64;
        let mut counts = [0u32; 4];
        let mut cumulative = 0.0;
        let mut assigned = 0u32;
        for (i, f) in fractions.iter().enumerate() {
            cumulative += f;
            let upto = (cumulative * n).round().min(n) as u32;
            counts[i] = upto - assigned;
            assigned = upto;
        }
        counts[3] += self.student_count - assigned;
        counts
    }
}

/// One simulated classroom interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub mix: StudentMix,
    pub duration_ms: u64,
    pub fps: f64,
    pub cameras: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthError {
    BadMix,
    BadProfile(EngagementState),
    BadSpec,
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SynthError::BadMix => write!(f, "student mix fractions must be non-negative and sum to 1"),
            SynthError::BadProfile(s) => write!(f, "emotion profile for {} does not sum to 1", s.name()),
            SynthError::BadSpec => write!(f, "segment spec needs positive duration, fps, and cameras"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SynthError {}

/// Majority-rules segment label from the behavioral mix. Rules fire in
/// order: active majority, attentive majority, disengaged share above a
/// quarter, otherwise passive.
pub fn label_segment(mix: &StudentMix) -> EngagementState {
    if mix.active > 0.60 {
        EngagementState::ActiveParticipation
    } else if mix.attentive > 0.60 {
        EngagementState::AttentiveListening
    } else if mix.disengaged > 0.25 {
        EngagementState::Disengaged
    } else {
        EngagementState::PassivePresence
    }
}

const CLASS_ORDER: [EngagementState; 4] = [
    EngagementState::ActiveParticipation,
    EngagementState::AttentiveListening,
    EngagementState::PassivePresence,
    EngagementState::Disengaged,
];

fn generate_segment_at(
    spec: &SegmentSpec,
    profiles: &[CategoryEmotionProfile; 4],
    start_ms: u64,
    start_frame: u64,
    out: &mut Vec<DetectionEvent>,
) -> Result<(), SynthError> {
    spec.mix.validate()?;
    for p in profiles {
        p.validate()?;
    }
    if spec.duration_ms == 0 || !(spec.fps > 0.0) || spec.cameras == 0 {
        return Err(SynthError::BadSpec);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let counts = spec.mix.class_counts();
    let mut student_class = Vec::with_capacity(spec.mix.student_count as usize);
    for (class, &count) in CLASS_ORDER.iter().zip(&counts) {
        for _ in 0..count {
            student_class.push(*class);
        }
    }

    let frame_count = (spec.duration_ms as f64 * spec.fps / 1000.0).floor() as u64;
    let frame_ms = 1000.0 / spec.fps;
    for frame in 0..frame_count {
        let timestamp_ms = start_ms + (frame as f64 * frame_ms) as u64;
        for (student, class) in student_class.iter().enumerate() {
            let label = profile_for(profiles, *class).sample(&mut rng);
            let confidence = rng.gen_range(0.6..1.0);
            out.push(DetectionEvent {
                camera_id: student as u32 % spec.cameras,
                frame_index: start_frame + frame,
                timestamp_ms,
                track_id: student as u64,
                bbox: BBox(0.5, 0.5, 0.08, 0.1),
                label,
                confidence,
            });
        }
    }
    Ok(())
}

/// Generates one labeled segment starting at timestamp 0. Identical specs
/// produce identical streams.
pub fn generate_segment(
    spec: &SegmentSpec,
    profiles: &[CategoryEmotionProfile; 4],
) -> Result<(Vec<DetectionEvent>, EngagementState), SynthError> {
    let mut events = Vec::new();
    generate_segment_at(spec, profiles, 0, 0, &mut events)?;
    Ok((events, label_segment(&spec.mix)))
}

/// Relabels events with the classifier's known confusion rates: anger and
/// disgust swap with probability 0.12 each way, sadness reads as neutral
/// with probability 0.08. Count, order, timestamps, and confidences are
/// untouched.
pub fn inject_classifier_noise(stream: &[DetectionEvent], seed: u64) -> Vec<DetectionEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    stream
        .iter()
        .map(|event| {
            let mut out = *event;
            // One draw per event keeps the stream length-stable under
            // label edits.
            let roll: f64 = rng.gen();
            out.label = match event.label {
                EmotionLabel::Anger if roll < 0.12 => EmotionLabel::Disgust,
                EmotionLabel::Disgust if roll < 0.12 => EmotionLabel::Anger,
                EmotionLabel::Sadness if roll < 0.08 => EmotionLabel::Neutral,
                other => other,
            };
            out
        })
        .collect()
}

/// A generated multi-segment session: the event stream plus per-segment
/// ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStream {
    pub events: Vec<DetectionEvent>,
    pub truths: Vec<EngagementState>,
    pub segment_duration_ms: Vec<u64>,
}

/// Concatenates segments into one continuous session stream.
///
/// Timestamps and frame indices continue across segment boundaries. With
/// `noise` set, confusion noise is applied over the whole stream with a
/// seed derived from the segment seeds.
pub fn generate_session(
    segments: &[SegmentSpec],
    profiles: &[CategoryEmotionProfile; 4],
    noise: bool,
) -> Result<SessionStream, SynthError> {
    let mut events = Vec::new();
    let mut truths = Vec::new();
    let mut segment_duration_ms = Vec::new();
    let mut start_ms = 0u64;
    let mut start_frame = 0u64;
    for spec in segments {
        generate_segment_at(spec, profiles, start_ms, start_frame, &mut events)?;
        truths.push(label_segment(&spec.mix));
        segment_duration_ms.push(spec.duration_ms);
        start_ms += spec.duration_ms;
        start_frame += (spec.duration_ms as f64 * spec.fps / 1000.0).floor() as u64;
    }
    if noise {
        let noise_seed = segments
            .iter()
            .fold(0x9e37_79b9_7f4a_7c15u64, |acc, s| {
                acc.rotate_left(7) ^ s.seed
            });
        events = inject_classifier_noise(&events, noise_seed);
    }
    Ok(SessionStream {
        events,
        truths,
        segment_duration_ms,
    })
}

/// The built-in hour-long session arc: an active opening, an attentive
/// middle, and a passive final third with two brief disengaged dips.
pub fn paper_session_preset(session_seed: u64) -> Vec<SegmentSpec> {
    let mix = |active, attentive, passive, disengaged| StudentMix {
        active,
        attentive,
        passive,
        disengaged,
        student_count: 24,
    };
    let mixes = [
        // 0 to 25 min: participation-heavy opening.
        mix(0.70, 0.20, 0.10, 0.00),
        mix(0.70, 0.20, 0.10, 0.00),
        mix(0.65, 0.25, 0.10, 0.00),
        mix(0.65, 0.20, 0.15, 0.00),
        mix(0.62, 0.23, 0.15, 0.00),
        // 25 to 40 min: attentive and passive middle.
        mix(0.10, 0.65, 0.25, 0.00),
        mix(0.05, 0.62, 0.28, 0.05),
        mix(0.05, 0.55, 0.30, 0.10),
        // 40 to 60 min: passive drift with disengaged dips near
        // minutes 40 and 50.
        mix(0.00, 0.20, 0.50, 0.30),
        mix(0.00, 0.25, 0.55, 0.20),
        mix(0.00, 0.15, 0.50, 0.35),
        mix(0.00, 0.20, 0.60, 0.20),
    ];
    mixes
        .iter()
        .enumerate()
        .map(|(i, &mix)| SegmentSpec {
            mix,
            duration_ms: 300_000,
            fps: 1.0,
            cameras: 2,
            seed: session_seed.wrapping_add(i as u64),
        })
        .collect()
}
