//! Engine parameter set: emotion weights, smoothing coefficients, thresholds.

use core::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::emotion::{EmotionLabel, EMOTION_COUNT};
use crate::state::EngagementState;

/// Per-emotion weight vector, keyed by emotion in index order.
///
/// Serializes as a JSON map from lowercase emotion name to weight so the
/// params file reads the same way the weights are usually written down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaWeights(pub [f64; EMOTION_COUNT]);

impl BetaWeights {
    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.0[label.pos()]
    }

    pub fn set(&mut self, label: EmotionLabel, value: f64) {
        self.0[label.pos()] = value;
    }

    /// Recommended default weights: neutral lowest, negative emotions highest.
    pub fn recommended() -> Self {
        let mut b = BetaWeights([0.0; EMOTION_COUNT]);
        b.set(EmotionLabel::Neutral, 0.5);
        b.set(EmotionLabel::Happiness, 0.7);
        b.set(EmotionLabel::Surprise, 0.6);
        b.set(EmotionLabel::Sadness, 0.75);
        b.set(EmotionLabel::Anger, 0.85);
        b.set(EmotionLabel::Disgust, 0.8);
        b.set(EmotionLabel::Fear, 0.9);
        b
    }
}

impl Serialize for BetaWeights {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(EMOTION_COUNT))?;
        for label in EmotionLabel::ALL {
            map.serialize_entry(label.name(), &self.get(label))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for BetaWeights {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BetaVisitor;

        impl<'de> Visitor<'de> for BetaVisitor {
            type Value = BetaWeights;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from emotion name to weight with all seven emotions")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<BetaWeights, A::Error> {
                let mut values = [None::<f64>; EMOTION_COUNT];
                while let Some((label, value)) = map.next_entry::<EmotionLabel, f64>()? {
                    if values[label.pos()].replace(value).is_some() {
                        return Err(serde::de::Error::custom("duplicate emotion in beta map"));
                    }
                }
                let mut out = [0.0; EMOTION_COUNT];
                for label in EmotionLabel::ALL {
                    out[label.pos()] = values[label.pos()].ok_or_else(|| {
                        serde::de::Error::custom("beta map missing an emotion entry")
                    })?;
                }
                Ok(BetaWeights(out))
            }
        }

        deserializer.deserialize_map(BetaVisitor)
    }
}

/// Strictly increasing classification split points `(t1, t2, t3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds(pub f64, pub f64, pub f64);

impl Thresholds {
    pub fn is_strictly_increasing(&self) -> bool {
        self.0 < self.1 && self.1 < self.2
    }

    /// Returns the same thresholds shifted by `eps` (all three together).
    pub fn shifted(&self, eps: f64) -> Thresholds {
        Thresholds(self.0 + eps, self.1 + eps, self.2 + eps)
    }
}

/// Parameter validation failure; the message names the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamError {
    ThresholdsNotIncreasing,
    BetaOutOfRange(EmotionLabel),
    AlphaOutOfRange,
    NegativeLambda,
    NegativeDelta,
    ThetaOutOfRange,
    ZeroWindow,
    ZeroVarianceWindow,
    NonFinite(&'static str),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::ThresholdsNotIncreasing => write!(f, "thresholds not strictly increasing"),
            ParamError::BetaOutOfRange(label) => {
                write!(f, "beta[{}] out of range (0,1]", label.name())
            }
            ParamError::AlphaOutOfRange => write!(f, "alpha out of range"),
            ParamError::NegativeLambda => write!(f, "lambda_reg must be non-negative"),
            ParamError::NegativeDelta => write!(f, "delta must be non-negative"),
            ParamError::ThetaOutOfRange => write!(f, "theta out of range [0,1]"),
            ParamError::ZeroWindow => write!(f, "window_ms must be positive"),
            ParamError::ZeroVarianceWindow => write!(f, "variance_window must be positive"),
            ParamError::NonFinite(field) => write!(f, "{field} must be finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParamError {}

/// Which denominator the per-window frequency vector divides by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaDenominator {
    /// Divide by the retained detection count (the default).
    #[default]
    RetainedCount,
    /// Divide by the number of distinct frames observed in the window.
    FrameCount,
}

/// Complete engine configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineParams {
    /// Per-emotion weights, each in `(0, 1]`.
    pub beta: BetaWeights,
    /// Additive bias on the raw window score.
    pub eta: f64,
    /// Variance regularization strength, `>= 0`.
    pub lambda_reg: f64,
    /// EMA smoothing coefficient in `[0, 1]`; larger keeps more history.
    pub alpha: f64,
    /// Time-weight growth per window in the session aggregate, `>= 0`.
    pub delta: f64,
    /// Detection confidence threshold; events with confidence `<= theta` drop.
    pub theta: f64,
    /// Window length in milliseconds.
    pub window_ms: u64,
    /// Number of trailing raw scores (including the current one) in the
    /// variance window.
    pub variance_window: usize,
    /// Classification split points.
    pub thresholds: Thresholds,
    /// Frequency denominator selection.
    #[serde(default)]
    pub gamma_denominator: GammaDenominator,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            beta: BetaWeights::recommended(),
            eta: 0.0,
            lambda_reg: 0.1,
            alpha: 0.7,
            delta: 0.05,
            theta: 0.5,
            window_ms: 60_000,
            variance_window: 5,
            thresholds: Thresholds(0.58, 0.61, 0.64),
            gamma_denominator: GammaDenominator::RetainedCount,
        }
    }
}

impl EngineParams {
    /// Checks every field invariant, returning the params unchanged on
    /// success.
    pub fn validate(self) -> Result<EngineParams, ParamError> {
        for label in EmotionLabel::ALL {
            let b = self.beta.get(label);
            if !b.is_finite() {
                return Err(ParamError::NonFinite("beta"));
            }
            if !(b > 0.0 && b <= 1.0) {
                return Err(ParamError::BetaOutOfRange(label));
            }
        }
        if !self.eta.is_finite() {
            return Err(ParamError::NonFinite("eta"));
        }
        if !self.alpha.is_finite() || !(0.0..=1.0).contains(&self.alpha) {
            return Err(ParamError::AlphaOutOfRange);
        }
        if !self.lambda_reg.is_finite() || self.lambda_reg < 0.0 {
            return Err(ParamError::NegativeLambda);
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(ParamError::NegativeDelta);
        }
        if !self.theta.is_finite() || !(0.0..=1.0).contains(&self.theta) {
            return Err(ParamError::ThetaOutOfRange);
        }
        if self.window_ms == 0 {
            return Err(ParamError::ZeroWindow);
        }
        if self.variance_window == 0 {
            return Err(ParamError::ZeroVarianceWindow);
        }
        let t = &self.thresholds;
        if !(t.0.is_finite() && t.1.is_finite() && t.2.is_finite()) {
            return Err(ParamError::NonFinite("thresholds"));
        }
        if !t.is_strictly_increasing() {
            return Err(ParamError::ThresholdsNotIncreasing);
        }
        Ok(self)
    }

    /// Maps a session score to its engagement state band.
    ///
    /// Bands are lower-closed and upper-open: scores below `t1` are
    /// attentive, `[t1, t2)` active, `[t2, t3)` passive, and `t3` upward
    /// disengaged.
    pub fn classify(&self, lambda_star: f64) -> EngagementState {
        let Thresholds(t1, t2, t3) = self.thresholds;
        if lambda_star < t1 {
            EngagementState::AttentiveListening
        } else if lambda_star < t2 {
            EngagementState::ActiveParticipation
        } else if lambda_star < t3 {
            EngagementState::PassivePresence
        } else {
            EngagementState::Disengaged
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recommended_validate_unchanged() {
        let p = EngineParams::default();
        let validated = p.clone().validate().unwrap();
        assert_eq!(validated, p);
        assert_eq!(p.beta.get(EmotionLabel::Neutral), 0.5);
        assert_eq!(p.beta.get(EmotionLabel::Happiness), 0.7);
        assert_eq!(p.beta.get(EmotionLabel::Surprise), 0.6);
        assert_eq!(p.beta.get(EmotionLabel::Sadness), 0.75);
        assert_eq!(p.beta.get(EmotionLabel::Anger), 0.85);
        assert_eq!(p.beta.get(EmotionLabel::Disgust), 0.8);
        assert_eq!(p.beta.get(EmotionLabel::Fear), 0.9);
        assert_eq!(p.eta, 0.0);
        assert_eq!(p.lambda_reg, 0.1);
        assert_eq!(p.alpha, 0.7);
        assert_eq!(p.delta, 0.05);
        assert_eq!(p.thresholds, Thresholds(0.58, 0.61, 0.64));
        assert_eq!(p.window_ms, 60_000);
    }

    #[test]
    fn rejects_descending_thresholds() {
        let p = EngineParams {
            thresholds: Thresholds(0.64, 0.61, 0.58),
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert_eq!(err, ParamError::ThresholdsNotIncreasing);
        assert_eq!(
            alloc::format!("{err}"),
            "thresholds not strictly increasing"
        );
    }

    #[test]
    fn rejects_alpha_out_of_range() {
        let p = EngineParams {
            alpha: 1.5,
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert_eq!(err, ParamError::AlphaOutOfRange);
        assert_eq!(alloc::format!("{err}"), "alpha out of range");
    }

    #[test]
    fn rejects_bad_beta_and_names_label() {
        let mut p = EngineParams::default();
        p.beta.set(EmotionLabel::Disgust, 0.0);
        match p.validate().unwrap_err() {
            ParamError::BetaOutOfRange(EmotionLabel::Disgust) => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_zero_window_and_negative_lambda() {
        let p = EngineParams {
            window_ms: 0,
            ..Default::default()
        };
        assert_eq!(p.validate().unwrap_err(), ParamError::ZeroWindow);
        let p = EngineParams {
            lambda_reg: -0.1,
            ..Default::default()
        };
        assert_eq!(p.validate().unwrap_err(), ParamError::NegativeLambda);
    }

    #[test]
    fn params_json_round_trip() {
        let p = EngineParams::default();
        let json = serde_json::to_string(&p).unwrap();
        let back: EngineParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn params_json_rejects_unknown_keys() {
        let json = r#"{"beta":{"neutral":0.5,"happiness":0.7,"surprise":0.6,"sadness":0.75,"anger":0.85,"disgust":0.8,"fear":0.9},"eta":0.0,"lambda_reg":0.1,"alpha":0.7,"delta":0.05,"theta":0.5,"window_ms":60000,"variance_window":5,"thresholds":[0.58,0.61,0.64],"bogus":1}"#;
        assert!(serde_json::from_str::<EngineParams>(json).is_err());
    }

    #[test]
    fn beta_map_requires_all_seven() {
        let json = r#"{"neutral":0.5}"#;
        assert!(serde_json::from_str::<BetaWeights>(json).is_err());
    }
}
