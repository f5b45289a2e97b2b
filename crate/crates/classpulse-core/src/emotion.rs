//! The seven facial emotion categories and their stable 1-based indexing.

use serde::{Deserialize, Serialize};

/// Number of emotion categories.
pub const EMOTION_COUNT: usize = 7;

/// One of the seven recognized emotion categories.
///
/// The declaration order is the canonical listing order and fixes the
/// 1-based index used everywhere a per-emotion vector appears.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Neutral,
    Happiness,
    Surprise,
    Sadness,
    Anger,
    Disgust,
    Fear,
}

impl EmotionLabel {
    /// All labels in index order.
    pub const ALL: [EmotionLabel; EMOTION_COUNT] = [
        EmotionLabel::Neutral,
        EmotionLabel::Happiness,
        EmotionLabel::Surprise,
        EmotionLabel::Sadness,
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
    ];

    /// 1-based index of this label (`Neutral` is 1, `Fear` is 7).
    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// Zero-based position, for indexing into 7-vectors.
    pub fn pos(self) -> usize {
        self as usize
    }

    /// Inverse of [`EmotionLabel::index`]. Returns `None` outside `1..=7`.
    pub fn from_index(index: usize) -> Option<EmotionLabel> {
        match index {
            1..=EMOTION_COUNT => Some(Self::ALL[index - 1]),
            _ => None,
        }
    }

    /// Lowercase wire name, matching the JSON event schema.
    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Happiness => "happiness",
            EmotionLabel::Surprise => "surprise",
            EmotionLabel::Sadness => "sadness",
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
        }
    }
}
