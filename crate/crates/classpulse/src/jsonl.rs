//! Newline-delimited JSON codec for detection events and reports.

use std::io::{BufRead, Write};

use classpulse_core::DetectionEvent;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("line {line}: malformed event record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: invalid event: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: classpulse_core::EventError,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses and validates one event line. `line` is 1-based and only used
/// for error reporting.
pub fn parse_event_line(text: &str, line: usize) -> Result<DetectionEvent, JsonlError> {
    let event: DetectionEvent =
        serde_json::from_str(text).map_err(|source| JsonlError::Malformed { line, source })?;
    event
        .validate()
        .map_err(|source| JsonlError::Invalid { line, source })?;
    Ok(event)
}

/// Iterates validated events from a reader, skipping blank lines.
pub fn read_events<R: BufRead>(reader: R) -> impl Iterator<Item = Result<DetectionEvent, JsonlError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(idx, result)| match result {
            Ok(text) if text.trim().is_empty() => None,
            Ok(text) => Some(parse_event_line(&text, idx + 1)),
            Err(e) => Some(Err(JsonlError::Io(e))),
        })
}

/// Writes one value as a JSON line.
pub fn write_line<W: Write, T: Serialize>(writer: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *writer, value)?;
    writer.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const GOOD: &str = r#"{"camera_id":1,"frame_index":42,"timestamp_ms":1680,"track_id":7,"bbox":[0.5,0.5,0.1,0.12],"label":"happiness","confidence":0.93}"#;

    #[test]
    fn round_trips_an_event() {
        let event = parse_event_line(GOOD, 1).unwrap();
        let mut out = Vec::new();
        write_line(&mut out, &event).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().trim_end(), GOOD);
    }

    #[test]
    fn errors_carry_the_line_number() {
        let input = format!("{GOOD}\n\nnot json\n");
        let results: Vec<_> = read_events(Cursor::new(input)).collect();
        assert_eq!(results.len(), 2);
        assert!(results[0].is_ok());
        let err = results[1].as_ref().unwrap_err().to_string();
        assert!(err.starts_with("line 3:"), "{err}");
    }

    #[test]
    fn invalid_confidence_is_rejected() {
        let bad = GOOD.replace("0.93", "1.5");
        let err = parse_event_line(&bad, 9).unwrap_err().to_string();
        assert!(err.contains("line 9") && err.contains("confidence"), "{err}");
    }
}
