//! The four-valued ordinal engagement classification.

use serde::{Deserialize, Serialize};

/// Discrete classroom engagement state, ordered by increasing session score.
///
/// Higher ordinal value means worse engagement: the session score
/// distribution places attentive classrooms lowest and disengaged ones
/// highest, so `AttentiveListening < ActiveParticipation < PassivePresence
/// < Disengaged` both as ordinals and as score bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementState {
    AttentiveListening = 0,
    ActiveParticipation = 1,
    PassivePresence = 2,
    Disengaged = 3,
}

impl EngagementState {
    pub const ALL: [EngagementState; 4] = [
        EngagementState::AttentiveListening,
        EngagementState::ActiveParticipation,
        EngagementState::PassivePresence,
        EngagementState::Disengaged,
    ];

    /// Ordinal severity encoding, 0 (attentive) through 3 (disengaged).
    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ord: u8) -> Option<EngagementState> {
        Self::ALL.get(ord as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            EngagementState::AttentiveListening => "attentive_listening",
            EngagementState::ActiveParticipation => "active_participation",
            EngagementState::PassivePresence => "passive_presence",
            EngagementState::Disengaged => "disengaged",
        }
    }
}
