//! Live serve mode: accepts producer event streams over TCP, scores them
//! in real time, publishes window aggregates to subscribers, and persists
//! the session.
//!
//! Shutdown: the session ends once at least one producer has connected and
//! every producer has disconnected. The persisted event log contains the
//! retained events in window-emission order, so it is itself a valid
//! replay input that reproduces the same report.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use classpulse_core::{DetectionEvent, EngineParams, SessionReport, WindowAggregate};
use serde::Serialize;

use crate::jsonl::{parse_event_line, write_line};
use crate::pipeline::{Pipeline, Smoothing};

/// Names of the files a session leaves in its persistence directory.
pub const EVENT_LOG: &str = "events.jsonl";
pub const WINDOW_LOG: &str = "windows.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone)]
pub struct ServeConfig {
    /// Producer endpoint: newline-delimited JSON event records.
    pub listen: SocketAddr,
    /// Optional subscriber endpoint: window aggregates as JSON lines.
    pub feed: Option<SocketAddr>,
    pub persist_dir: PathBuf,
    pub params: EngineParams,
    pub smoothing: Smoothing,
}

/// Addresses actually bound (useful when the config asked for port 0).
#[derive(Debug, Clone, Copy)]
pub struct BoundAddrs {
    pub listen: SocketAddr,
    pub feed: Option<SocketAddr>,
}

enum Msg {
    Connect(u64),
    Event(u64, DetectionEvent),
    Disconnect(u64),
}

#[derive(Serialize)]
struct ErrorReply<'a> {
    error: &'a str,
}

fn producer_reader(stream: TcpStream, idx: u64, tx: Sender<Msg>) {
    let mut writer = stream.try_clone().ok();
    let reader = BufReader::new(stream);
    let _ = tx.send(Msg::Connect(idx));
    for (line_no, line) in reader.lines().enumerate() {
        let Ok(text) = line else { break };
        if text.trim().is_empty() {
            continue;
        }
        match parse_event_line(&text, line_no + 1) {
            Ok(event) => {
                if tx.send(Msg::Event(idx, event)).is_err() {
                    break;
                }
            }
            Err(e) => {
                // Bad records get an error reply; the stream stays open.
                if let Some(w) = writer.as_mut() {
                    let _ = write_line(w, &ErrorReply { error: &e.to_string() });
                }
            }
        }
    }
    let _ = tx.send(Msg::Disconnect(idx));
}

fn accept_producers(listener: TcpListener, tx: Sender<Msg>, shutdown: Arc<AtomicBool>) {
    listener
        .set_nonblocking(true)
        .expect("nonblocking listener");
    let mut next_idx = 0u64;
    while !shutdown.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false).ok();
                let idx = next_idx;
                next_idx += 1;
                let tx = tx.clone();
                std::thread::spawn(move || producer_reader(stream, idx, tx));
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(_) => break,
        }
    }
}

fn accept_subscribers(
    listener: TcpListener,
    sinks: Arc<Mutex<Vec<TcpStream>>>,
    shutdown: Arc<AtomicBool>,
) {
    listener
        .set_nonblocking(true)
        .expect("nonblocking listener");
    while !shutdown.load(Ordering::Relaxed) {
        match listener.accept() {
            Ok((stream, _)) => {
                stream.set_nonblocking(false).ok();
                sinks.lock().unwrap().push(stream);
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(_) => break,
        }
    }
}

fn broadcast(sinks: &Mutex<Vec<TcpStream>>, aggregate: &WindowAggregate) {
    let mut sinks = sinks.lock().unwrap();
    sinks.retain_mut(|stream| write_line(stream, aggregate).is_ok());
}

struct SessionFiles {
    events: BufWriter<File>,
    windows: BufWriter<File>,
}

impl SessionFiles {
    fn create(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(SessionFiles {
            events: BufWriter::new(File::create(dir.join(EVENT_LOG))?),
            windows: BufWriter::new(File::create(dir.join(WINDOW_LOG))?),
        })
    }
}

/// Runs a serve session to completion and returns the final report.
///
/// `on_bound` fires once both endpoints are listening, with the resolved
/// addresses.
pub fn serve<F>(cfg: ServeConfig, on_bound: F) -> anyhow::Result<SessionReport>
where
    F: FnOnce(BoundAddrs),
{
    let producer_listener = TcpListener::bind(cfg.listen)
        .map_err(|e| anyhow::anyhow!("cannot bind {}: {e}", cfg.listen))?;
    let feed_listener = match cfg.feed {
        Some(addr) => {
            Some(TcpListener::bind(addr).map_err(|e| anyhow::anyhow!("cannot bind {addr}: {e}"))?)
        }
        None => None,
    };
    on_bound(BoundAddrs {
        listen: producer_listener.local_addr()?,
        feed: feed_listener.as_ref().map(|l| l.local_addr().unwrap()),
    });

    let mut files = SessionFiles::create(&cfg.persist_dir)?;
    let shutdown = Arc::new(AtomicBool::new(false));
    let sinks = Arc::new(Mutex::new(Vec::new()));

    let (tx, rx): (Sender<Msg>, Receiver<Msg>) = channel();
    let accept_handle = {
        let shutdown = Arc::clone(&shutdown);
        let tx = tx.clone();
        std::thread::spawn(move || accept_producers(producer_listener, tx, shutdown))
    };
    drop(tx);
    let feed_handle = feed_listener.map(|listener| {
        let shutdown = Arc::clone(&shutdown);
        let sinks = Arc::clone(&sinks);
        std::thread::spawn(move || accept_subscribers(listener, sinks, shutdown))
    });

    let mut pipeline = Pipeline::new(cfg.params.clone(), cfg.smoothing)?;
    let mut sources = HashMap::new();
    let mut ever_connected = 0usize;
    let mut active = 0usize;

    // Retained events are persisted in window-emission order, before
    // label smoothing, so the log replays through the same pipeline to
    // the same report.
    let persist_and_publish = |files: &mut SessionFiles,
                                   emitted: &[(classpulse_core::WindowBatch, WindowAggregate)]|
     -> anyhow::Result<()> {
        for (batch, aggregate) in emitted {
            for event in &batch.events {
                write_line(&mut files.events, event)?;
            }
            write_line(&mut files.windows, aggregate)?;
            broadcast(&sinks, aggregate);
        }
        Ok(())
    };

    loop {
        match rx.recv_timeout(Duration::from_millis(100)) {
            Ok(Msg::Connect(idx)) => {
                sources.insert(idx, pipeline.add_source());
                ever_connected += 1;
                active += 1;
            }
            Ok(Msg::Event(idx, event)) => {
                let source = sources[&idx];
                let emitted = pipeline.push_from_traced(source, event)?;
                persist_and_publish(&mut files, &emitted)?;
            }
            Ok(Msg::Disconnect(idx)) => {
                let source = sources[&idx];
                active -= 1;
                let emitted = pipeline.end_source_traced(source)?;
                persist_and_publish(&mut files, &emitted)?;
                if active == 0 && ever_connected > 0 {
                    break;
                }
            }
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => break,
        }
    }

    let (tail, report) = pipeline.finish_traced()?;
    persist_and_publish(&mut files, &tail)?;
    shutdown.store(true, Ordering::Relaxed);
    accept_handle.join().ok();
    if let Some(h) = feed_handle {
        h.join().ok();
    }

    files.events.flush()?;
    files.windows.flush()?;
    let report_file = File::create(cfg.persist_dir.join(REPORT_FILE))?;
    serde_json::to_writer_pretty(BufWriter::new(report_file), &report)?;
    Ok(report)
}
