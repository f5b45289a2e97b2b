//! Detection events: one face observation per camera frame.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::emotion::EmotionLabel;

/// Face bounding box in normalized image coordinates.
///
/// Stored center-x, center-y, width, height; serialized as a 4-array.
/// Scoring never reads it, but keeping it lets replay logs round-trip
/// real detector output losslessly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox(pub f64, pub f64, pub f64, pub f64);

impl BBox {
    pub fn center_x(&self) -> f64 {
        self.0
    }

    pub fn center_y(&self) -> f64 {
        self.1
    }

    pub fn width(&self) -> f64 {
        self.2
    }

    pub fn height(&self) -> f64 {
        self.3
    }
}

/// One face observation: where it was seen, which track it belongs to, and
/// the classifier's label and confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionEvent {
    pub camera_id: u32,
    pub frame_index: u64,
    pub timestamp_ms: u64,
    pub track_id: u64,
    pub bbox: BBox,
    pub label: EmotionLabel,
    pub confidence: f64,
}

/// Why an event failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventError {
    ConfidenceOutOfRange,
    BBoxDegenerate,
    BBoxCenterOutOfRange,
}

impl fmt::Display for EventError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventError::ConfidenceOutOfRange => write!(f, "confidence out of range [0,1]"),
            EventError::BBoxDegenerate => write!(f, "bbox width and height must be positive"),
            EventError::BBoxCenterOutOfRange => write!(f, "bbox center outside [0,1]^2"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EventError {}

impl DetectionEvent {
    /// Checks the per-event invariants (confidence range, bbox geometry).
    pub fn validate(&self) -> Result<(), EventError> {
        if !self.confidence.is_finite() || !(0.0..=1.0).contains(&self.confidence) {
            return Err(EventError::ConfidenceOutOfRange);
        }
        if !(self.bbox.width() > 0.0) || !(self.bbox.height() > 0.0) {
            return Err(EventError::BBoxDegenerate);
        }
        let (cx, cy) = (self.bbox.center_x(), self.bbox.center_y());
        if !(0.0..=1.0).contains(&cx) || !(0.0..=1.0).contains(&cy) {
            return Err(EventError::BBoxCenterOutOfRange);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DetectionEvent {
        DetectionEvent {
            camera_id: 1,
            frame_index: 42,
            timestamp_ms: 1680,
            track_id: 7,
            bbox: BBox(0.5, 0.5, 0.1, 0.12),
            label: EmotionLabel::Happiness,
            confidence: 0.93,
        }
    }

    #[test]
    fn canonical_json_shape() {
        let json = serde_json::to_string(&sample()).unwrap();
        assert_eq!(
            json,
            r#"{"camera_id":1,"frame_index":42,"timestamp_ms":1680,"track_id":7,"bbox":[0.5,0.5,0.1,0.12],"label":"happiness","confidence":0.93}"#
        );
        let back: DetectionEvent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn unknown_keys_rejected() {
        let json = r#"{"camera_id":1,"frame_index":42,"timestamp_ms":1680,"track_id":7,"bbox":[0.5,0.5,0.1,0.12],"label":"happiness","confidence":0.93,"extra":true}"#;
        assert!(serde_json::from_str::<DetectionEvent>(json).is_err());
    }

    #[test]
    fn validation_catches_bad_confidence_and_bbox() {
        let mut e = sample();
        e.confidence = 1.2;
        assert_eq!(e.validate(), Err(EventError::ConfidenceOutOfRange));

        let mut e = sample();
        e.bbox = BBox(0.5, 0.5, 0.0, 0.1);
        assert_eq!(e.validate(), Err(EventError::BBoxDegenerate));

        let mut e = sample();
        e.bbox = BBox(1.5, 0.5, 0.1, 0.1);
        assert_eq!(e.validate(), Err(EventError::BBoxCenterOutOfRange));

        assert_eq!(sample().validate(), Ok(()));
    }
}
