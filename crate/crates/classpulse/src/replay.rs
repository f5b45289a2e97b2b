//! File replay: feeds a persisted event log through a sink, optionally
//! paced by the recorded timestamps.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::{Duration, Instant};

use classpulse_core::DetectionEvent;
use thiserror::Error;

use crate::jsonl::{read_events, JsonlError};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Decode(#[from] JsonlError),
}

/// Streams every event in the file to `sink` in file order.
///
/// `speed` 0 replays as fast as possible; any positive value paces the
/// stream by recorded timestamp deltas divided by the speed factor
/// (1 = real time). Returns the number of events delivered.
pub fn replay_file<F>(path: &Path, speed: f64, mut sink: F) -> Result<usize, ReplayError>
where
    F: FnMut(DetectionEvent),
{
    let file = File::open(path).map_err(|source| ReplayError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut count = 0usize;
    let mut pacing: Option<(Instant, u64)> = None;
    for result in read_events(BufReader::new(file)) {
        let event = result?;
        if speed > 0.0 {
            let (start, first_ts) = *pacing.get_or_insert_with(|| (Instant::now(), event.timestamp_ms));
            let offset_ms = (event.timestamp_ms - first_ts) as f64 / speed;
            let due = start + Duration::from_secs_f64(offset_ms / 1000.0);
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        sink(event);
        count += 1;
    }
    Ok(count)
}
