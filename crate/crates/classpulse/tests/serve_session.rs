//! End-to-end socket session: producers stream events in, a subscriber
//! receives window aggregates, and the persisted session replays to the
//! same report.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::mpsc::channel;
use std::time::Duration;

use classpulse::pipeline::{Pipeline, Smoothing};
use classpulse::replay::replay_file;
use classpulse::serve::{serve, BoundAddrs, ServeConfig, EVENT_LOG, REPORT_FILE, WINDOW_LOG};
use classpulse_core::{EngineParams, SessionReport, WindowAggregate};

fn event_line(camera: u32, ts: u64, track: u64, label: &str, confidence: f64) -> String {
    format!(
        concat!(
            r#"{{"camera_id":{},"frame_index":{},"timestamp_ms":{},"track_id":{},"#,
            r#""bbox":[0.5,0.5,0.1,0.1],"label":"{}","confidence":{}}}"#
        ),
        camera,
        ts / 40,
        ts,
        track,
        label,
        confidence
    )
}

fn test_params() -> EngineParams {
    let mut params = EngineParams::default();
    params.window_ms = 1000;
    params
}

#[test]
fn session_over_sockets_persists_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServeConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        feed: Some("127.0.0.1:0".parse().unwrap()),
        persist_dir: dir.path().to_path_buf(),
        params: test_params(),
        smoothing: Smoothing::Persistence(2),
    };
    let (addr_tx, addr_rx) = channel::<BoundAddrs>();
    let server = std::thread::spawn(move || {
        serve(cfg, move |addrs| {
            addr_tx.send(addrs).unwrap();
        })
        .unwrap()
    });
    let addrs = addr_rx.recv_timeout(Duration::from_secs(5)).unwrap();

    // Subscriber joins before any windows close. Registration happens on
    // the accept thread, so give it a moment to land before streaming.
    let subscriber = TcpStream::connect(addrs.feed.unwrap()).unwrap();
    std::thread::sleep(Duration::from_millis(100));

    let mut producer_a = TcpStream::connect(addrs.listen).unwrap();
    let mut producer_b = TcpStream::connect(addrs.listen).unwrap();

    // Three one-second windows; both cameras must pass each boundary
    // before the window flushes.
    for w in 0..3u64 {
        for i in 0..5u64 {
            let ts = w * 1000 + i * 200;
            writeln!(producer_a, "{}", event_line(0, ts, 1, "happiness", 0.9)).unwrap();
            writeln!(producer_b, "{}", event_line(1, ts, 2, "neutral", 0.8)).unwrap();
        }
    }
    // A malformed line gets an error reply and does not kill the stream.
    writeln!(producer_a, "not json").unwrap();
    let mut reply = String::new();
    BufReader::new(producer_a.try_clone().unwrap())
        .read_line(&mut reply)
        .unwrap();
    assert!(reply.contains("error"), "{reply}");

    drop(producer_a);
    drop(producer_b);
    let report = server.join().unwrap();
    assert_eq!(report.windows.len(), 3);

    // The subscriber saw every closed window as a JSON line.
    let mut feed_lines = Vec::new();
    for line in BufReader::new(subscriber).lines() {
        let Ok(line) = line else { break };
        feed_lines.push(serde_json::from_str::<WindowAggregate>(&line).unwrap());
    }
    // A subscriber sees every window closed after it registered, as a
    // contiguous run ending with the final flush.
    assert!(!feed_lines.is_empty());
    let indices: Vec<u64> = feed_lines.iter().map(|w| w.window_index).collect();
    let first = indices[0];
    let expected: Vec<u64> = (first..3).collect();
    assert_eq!(indices, expected);
    assert_eq!(*indices.last().unwrap(), 2);

    // Persisted artifacts exist and agree with the in-memory report.
    let report_text = std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
    let persisted: SessionReport = serde_json::from_str(&report_text).unwrap();
    assert_eq!(persisted, report);

    let window_lines = std::fs::read_to_string(dir.path().join(WINDOW_LOG)).unwrap();
    assert_eq!(window_lines.lines().count(), 3);

    // Replaying the event log through the same pipeline settings
    // reproduces the report exactly.
    let mut pipeline = Pipeline::new(test_params(), Smoothing::Persistence(2)).unwrap();
    replay_file(&dir.path().join(EVENT_LOG), 0.0, |e| {
        pipeline.push(e).unwrap();
    })
    .unwrap();
    let (_, replayed) = pipeline.finish().unwrap();
    assert_eq!(replayed, report);
}

#[test]
fn empty_feed_session_shuts_down_after_last_producer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServeConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        feed: None,
        persist_dir: dir.path().to_path_buf(),
        params: test_params(),
        smoothing: Smoothing::Off,
    };
    let (addr_tx, addr_rx) = channel::<BoundAddrs>();
    let server = std::thread::spawn(move || {
        serve(cfg, move |addrs| {
            addr_tx.send(addrs).unwrap();
        })
    });
    let addrs = addr_rx.recv_timeout(Duration::from_secs(5)).unwrap();
    let mut producer = TcpStream::connect(addrs.listen).unwrap();
    writeln!(producer, "{}", event_line(0, 0, 1, "neutral", 0.9)).unwrap();
    writeln!(producer, "{}", event_line(0, 2500, 1, "neutral", 0.9)).unwrap();
    drop(producer);
    let report = server.join().unwrap().unwrap();
    // Windows 0 through 2 exist; window 1 is empty but still reported.
    assert_eq!(report.windows.len(), 3);
    assert!(report.windows[1].retained_count == 0);
}
