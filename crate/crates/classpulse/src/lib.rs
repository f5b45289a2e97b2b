//! IO companion to `classpulse-core`: JSON-line codecs, replay, socket
//! ingestion, session persistence, and the end-to-end pipeline driver.

pub mod jsonl;
pub mod pipeline;
pub mod replay;
pub mod serve;
