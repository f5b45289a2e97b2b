//! Command-line front end for the engagement analytics engine.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use classpulse::jsonl::{read_events, write_line};
use classpulse::pipeline::{Pipeline, Smoothing};
use classpulse::replay::replay_file;
use classpulse::serve::{serve, ServeConfig, EVENT_LOG, REPORT_FILE};
use classpulse_core::analysis::{
    ablation_sweep, perturb_thresholds, perturb_weights, smoothing_ablation,
};
use classpulse_core::calibration::{
    cross_validate, find_thresholds, grid_search_weights, score_gamma_sequence, LabeledSegment,
    WeightCandidateGrid,
};
use classpulse_core::synth::{
    default_profiles, generate_session, paper_session_preset, SegmentSpec, SessionStream,
};
use classpulse_core::windowing::StreamMerger;
use classpulse_core::{EngineParams, SessionReport, WindowBatch};

/// Exit codes: 0 success, 2 configuration error, 3 input error,
/// 4 runtime failure.
const EXIT_CONFIG: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "classpulse",
    about = "Real-time classroom engagement analytics over emotion detection streams",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct EngineFlags {
    /// Engine parameter file (JSON), defaults applied when omitted.
    #[arg(long, env = "CLASSPULSE_PARAMS")]
    params: Option<PathBuf>,
    /// Window length override in milliseconds.
    #[arg(long, env = "CLASSPULSE_WINDOW_MS")]
    window_ms: Option<u64>,
    /// Confidence threshold override.
    #[arg(long, env = "CLASSPULSE_THETA")]
    theta: Option<f64>,
    /// Label hysteresis persistence count.
    #[arg(long, env = "CLASSPULSE_PERSISTENCE", conflicts_with = "no_smoothing")]
    persistence: Option<u32>,
    /// Disable label hysteresis entirely.
    #[arg(long, env = "CLASSPULSE_NO_SMOOTHING")]
    no_smoothing: bool,
}

impl EngineFlags {
    fn load(&self) -> CliResult<(EngineParams, Smoothing)> {
        let mut params = match &self.params {
            None => EngineParams::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::config(format!("bad params file {}: {e}", path.display()))
                })?
            }
        };
        if let Some(w) = self.window_ms {
            params.window_ms = w;
        }
        if let Some(t) = self.theta {
            params.theta = t;
        }
        let params = params
            .validate()
            .map_err(|e| CliError::config(format!("invalid parameters: {e}")))?;
        let smoothing = if self.no_smoothing {
            Smoothing::Off
        } else {
            Smoothing::Persistence(self.persistence.unwrap_or(3))
        };
        Ok((params, smoothing))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic classroom session and score it.
    Simulate {
        /// Built-in session preset.
        #[arg(long, env = "CLASSPULSE_PRESET", conflicts_with = "spec")]
        preset: Option<Preset>,
        /// Segment spec file (JSON array).
        #[arg(long, env = "CLASSPULSE_SPEC")]
        spec: Option<PathBuf>,
        #[arg(long, env = "CLASSPULSE_SEED", default_value_t = 0)]
        seed: u64,
        /// Apply classifier confusion noise.
        #[arg(long, env = "CLASSPULSE_NOISE")]
        noise: bool,
        /// Event stream output path (JSON lines).
        #[arg(long, env = "CLASSPULSE_OUT")]
        out: Option<PathBuf>,
        /// Ground-truth sidecar output path.
        #[arg(long, env = "CLASSPULSE_TRUTH_OUT")]
        truth_out: Option<PathBuf>,
        /// Session report output path; stdout when omitted.
        #[arg(long, env = "CLASSPULSE_REPORT")]
        report: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Score a persisted event log.
    Replay {
        /// Event log to replay.
        #[arg(long = "replay", env = "CLASSPULSE_REPLAY")]
        input: PathBuf,
        /// Pacing factor: 0 = as fast as possible, 1 = real time.
        #[arg(long, env = "CLASSPULSE_SPEED", default_value_t = 0.0)]
        speed: f64,
        /// Session report output path; stdout when omitted.
        #[arg(long, env = "CLASSPULSE_REPORT")]
        report: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Ingest live producer streams over TCP and publish window scores.
    Serve {
        /// Producer endpoint to listen on.
        #[arg(long, env = "CLASSPULSE_LISTEN")]
        listen: SocketAddr,
        /// Subscriber feed endpoint.
        #[arg(long, env = "CLASSPULSE_FEED")]
        feed: Option<SocketAddr>,
        /// Session persistence directory.
        #[arg(long, env = "CLASSPULSE_PERSIST_DIR")]
        persist_dir: PathBuf,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Recover emotion weights and thresholds from labeled segments.
    Calibrate {
        /// Labeled segment corpus (JSON lines).
        #[arg(long, env = "CLASSPULSE_SEGMENTS")]
        segments: PathBuf,
        #[arg(long, env = "CLASSPULSE_FOLDS", default_value_t = 5)]
        folds: usize,
        /// Candidates advanced from grid search to cross-validation.
        #[arg(long, env = "CLASSPULSE_TOP_K", default_value_t = 10)]
        top_k: usize,
        #[arg(long, env = "CLASSPULSE_SEED", default_value_t = 0)]
        seed: u64,
        /// Calibration report output path; stdout when omitted.
        #[arg(long, env = "CLASSPULSE_OUT")]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Robustness analyses over a labeled corpus or event stream.
    Analyze {
        /// Input corpus: labeled segments, or an event log for the
        /// smoothing mode.
        #[arg(long, env = "CLASSPULSE_CORPUS")]
        corpus: PathBuf,
        #[arg(long, env = "CLASSPULSE_MODE", value_enum)]
        mode: AnalyzeMode,
        /// Weight scaling fraction for perturb-weights.
        #[arg(long, env = "CLASSPULSE_FRACTION", default_value_t = 0.2)]
        fraction: f64,
        /// Threshold shift for perturb-thresholds.
        #[arg(long, env = "CLASSPULSE_EPS", default_value_t = 0.02)]
        eps: f64,
        /// Refit thresholds on ablated scores in ablate mode.
        #[arg(long, env = "CLASSPULSE_REFIT")]
        refit: bool,
        /// Analysis report output path; stdout when omitted.
        #[arg(long, env = "CLASSPULSE_OUT")]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Recompute the report of a persisted serve session.
    Report {
        /// Persistence directory of a finished session.
        #[arg(long, env = "CLASSPULSE_SESSION_DIR")]
        session_dir: PathBuf,
        /// Report output path; stdout when omitted.
        #[arg(long, env = "CLASSPULSE_OUT")]
        out: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PaperSession,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeMode {
    PerturbWeights,
    PerturbThresholds,
    Ablate,
    Smoothing,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Simulate {
            preset,
            spec,
            seed,
            noise,
            out,
            truth_out,
            report,
            engine,
        } => cmd_simulate(preset, spec, seed, noise, out, truth_out, report, &engine),
        Command::Replay {
            input,
            speed,
            report,
            engine,
        } => cmd_replay(&input, speed, report, &engine),
        Command::Serve {
            listen,
            feed,
            persist_dir,
            engine,
        } => cmd_serve(listen, feed, persist_dir, &engine),
        Command::Calibrate {
            segments,
            folds,
            top_k,
            seed,
            out,
            engine,
        } => cmd_calibrate(&segments, folds, top_k, seed, out, &engine),
        Command::Analyze {
            corpus,
            mode,
            fraction,
            eps,
            refit,
            out,
            engine,
        } => cmd_analyze(&corpus, mode, fraction, eps, refit, out, &engine),
        Command::Report {
            session_dir,
            out,
            engine,
        } => cmd_report(&session_dir, out, &engine),
    }
}

fn write_output<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("cannot serialize output: {e}")))?;
    match out {
        None => {
            use std::io::Write;
            // A closed pipe (e.g. piping into head) is not an error.
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::runtime(
                    format!("cannot write to stdout: {e}"),
                )),
                _ => Ok(()),
            }
        }
        Some(path) => std::fs::write(path, json.as_bytes())
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display()))),
    }
}

fn score_stream(
    events: impl IntoIterator<Item = classpulse_core::DetectionEvent>,
    params: &EngineParams,
    smoothing: Smoothing,
) -> CliResult<SessionReport> {
    let mut pipeline = Pipeline::new(params.clone(), smoothing)
        .map_err(|e| CliError::config(e.to_string()))?;
    for event in events {
        pipeline
            .push(event)
            .map_err(|e| CliError::runtime(e.to_string()))?;
    }
    let (_, report) = pipeline
        .finish()
        .map_err(|e| CliError::input(format!("no windows: {e}")))?;
    Ok(report)
}

#[derive(Serialize)]
struct TruthSidecar {
    segments: Vec<TruthEntry>,
}

#[derive(Serialize)]
struct TruthEntry {
    index: usize,
    state: classpulse_core::EngagementState,
    duration_ms: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    preset: Option<Preset>,
    spec: Option<PathBuf>,
    seed: u64,
    noise: bool,
    out: Option<PathBuf>,
    truth_out: Option<PathBuf>,
    report: Option<PathBuf>,
    engine: &EngineFlags,
) -> CliResult<()> {
    let specs: Vec<SegmentSpec> = match (preset, spec) {
        (Some(Preset::PaperSession), None) => paper_session_preset(seed),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("bad spec file {}: {e}", path.display())))?
        }
        _ => {
            return Err(CliError::config(
                "exactly one of --preset or --spec is required",
            ))
        }
    };
    let session: SessionStream = generate_session(&specs, &default_profiles(), noise)
        .map_err(|e| CliError::config(format!("invalid spec: {e}")))?;

    if let Some(path) = &out {
        let mut writer = BufWriter::new(File::create(path).map_err(|e| {
            CliError::runtime(format!("cannot create {}: {e}", path.display()))
        })?);
        for event in &session.events {
            write_line(&mut writer, event)
                .map_err(|e| CliError::runtime(format!("write failed: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| CliError::runtime(format!("write failed: {e}")))?;
    }
    if let Some(path) = &truth_out {
        let sidecar = TruthSidecar {
            segments: session
                .truths
                .iter()
                .zip(&session.segment_duration_ms)
                .enumerate()
                .map(|(index, (&state, &duration_ms))| TruthEntry {
                    index,
                    state,
                    duration_ms,
                })
                .collect(),
        };
        write_output(&sidecar, Some(path))?;
    }

    let (params, smoothing) = engine.load()?;
    let session_report = score_stream(session.events, &params, smoothing)?;
    write_output(&session_report, report.as_deref())
}

fn cmd_replay(
    input: &Path,
    speed: f64,
    report: Option<PathBuf>,
    engine: &EngineFlags,
) -> CliResult<()> {
    let (params, smoothing) = engine.load()?;
    let mut pipeline =
        Pipeline::new(params, smoothing).map_err(|e| CliError::config(e.to_string()))?;
    let mut push_error = None;
    replay_file(input, speed, |event| {
        if push_error.is_none() {
            if let Err(e) = pipeline.push(event) {
                push_error = Some(e);
            }
        }
    })
    .map_err(|e| CliError::input(e.to_string()))?;
    if let Some(e) = push_error {
        return Err(CliError::runtime(e.to_string()));
    }
    let (_, session_report) = pipeline
        .finish()
        .map_err(|e| CliError::input(format!("no windows: {e}")))?;
    write_output(&session_report, report.as_deref())
}

fn cmd_serve(
    listen: SocketAddr,
    feed: Option<SocketAddr>,
    persist_dir: PathBuf,
    engine: &EngineFlags,
) -> CliResult<()> {
    let (params, smoothing) = engine.load()?;
    let report = serve(
        ServeConfig {
            listen,
            feed,
            persist_dir,
            params,
            smoothing,
        },
        |addrs| {
            eprintln!("listening for producers on {}", addrs.listen);
            if let Some(feed) = addrs.feed {
                eprintln!("publishing window feed on {feed}");
            }
        },
    )
    .map_err(|e| CliError::runtime(e.to_string()))?;
    write_output(&report, None)
}

fn load_segments(path: &Path) -> CliResult<Vec<LabeledSegment>> {
    let file = File::open(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut segments = Vec::new();
    let mut text = String::new();
    BufReader::new(file)
        .read_to_string(&mut text)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let segment: LabeledSegment = serde_json::from_str(line).map_err(|e| {
            CliError::input(format!("{}: line {}: {e}", path.display(), idx + 1))
        })?;
        segments.push(segment);
    }
    if segments.is_empty() {
        return Err(CliError::input(format!(
            "{}: no labeled segments",
            path.display()
        )));
    }
    Ok(segments)
}

#[derive(Serialize)]
struct CalibrationReport {
    ranked_weights: Vec<RankedWeight>,
    cv_f1: f64,
    cv_best: classpulse_core::BetaWeights,
    thresholds: classpulse_core::Thresholds,
    evaluation_count: usize,
}

#[derive(Serialize)]
struct RankedWeight {
    beta: classpulse_core::BetaWeights,
    mean_f1: f64,
}

fn cmd_calibrate(
    segments_path: &Path,
    folds: usize,
    top_k: usize,
    seed: u64,
    out: Option<PathBuf>,
    engine: &EngineFlags,
) -> CliResult<()> {
    let (params, _) = engine.load()?;
    let segments = load_segments(segments_path)?;
    let grid = WeightCandidateGrid::default();
    let (ranked, evaluation_count) =
        grid_search_weights(&grid, &segments, &params, params.thresholds)
            .map_err(|e| CliError::input(e.to_string()))?;
    let shortlist: Vec<_> = ranked.iter().take(top_k).map(|e| e.beta).collect();
    let cv = cross_validate(&shortlist, &segments, folds, seed, &params, params.thresholds)
        .map_err(|e| CliError::input(e.to_string()))?;

    let mut scored_params = params.clone();
    scored_params.beta = cv.beta;
    let scores: Vec<_> = segments
        .iter()
        .map(|s| {
            (
                score_gamma_sequence(&s.gamma_sequence, &scored_params),
                s.truth,
            )
        })
        .collect();
    let thresholds =
        find_thresholds(&scores).map_err(|e| CliError::input(e.to_string()))?;

    let report = CalibrationReport {
        ranked_weights: ranked
            .iter()
            .take(top_k)
            .map(|e| RankedWeight {
                beta: e.beta,
                mean_f1: e.mean_f1,
            })
            .collect(),
        cv_f1: cv.mean_f1,
        cv_best: cv.beta,
        thresholds,
        evaluation_count,
    };
    write_output(&report, out.as_deref())
}

fn load_event_stream_batches(path: &Path, params: &EngineParams) -> CliResult<Vec<WindowBatch>> {
    let file = File::open(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut merger = StreamMerger::new(params.window_ms, params.theta);
    let source = merger.add_source();
    let mut batches = Vec::new();
    for result in read_events(BufReader::new(file)) {
        let event = result.map_err(|e| CliError::input(e.to_string()))?;
        batches.extend(merger.push(source, event));
    }
    batches.extend(merger.finish());
    Ok(batches)
}

fn cmd_analyze(
    corpus: &Path,
    mode: AnalyzeMode,
    fraction: f64,
    eps: f64,
    refit: bool,
    out: Option<PathBuf>,
    engine: &EngineFlags,
) -> CliResult<()> {
    let (params, _) = engine.load()?;
    match mode {
        AnalyzeMode::PerturbWeights => {
            let sweep = perturb_weights(&load_segments(corpus)?, &params, fraction)
                .map_err(|e| CliError::input(e.to_string()))?;
            write_output(&sweep, out.as_deref())
        }
        AnalyzeMode::PerturbThresholds => {
            let sweep = perturb_thresholds(&load_segments(corpus)?, &params, eps)
                .map_err(|e| CliError::config(e.to_string()))?;
            write_output(&sweep, out.as_deref())
        }
        AnalyzeMode::Ablate => {
            let sweep = ablation_sweep(&load_segments(corpus)?, &params, refit)
                .map_err(|e| CliError::input(e.to_string()))?;
            write_output(&sweep, out.as_deref())
        }
        AnalyzeMode::Smoothing => {
            let batches = load_event_stream_batches(corpus, &params)?;
            let result = smoothing_ablation(&batches, &params)
                .map_err(|e| CliError::input(e.to_string()))?;
            write_output(&result, out.as_deref())
        }
    }
}

fn cmd_report(session_dir: &Path, out: Option<PathBuf>, engine: &EngineFlags) -> CliResult<()> {
    // Reuse the parameters the live session ran with unless overridden.
    let persisted: Option<SessionReport> = File::open(session_dir.join(REPORT_FILE))
        .ok()
        .and_then(|f| serde_json::from_reader(BufReader::new(f)).ok());
    let (params, smoothing) = match (&engine.params, persisted) {
        (None, Some(report)) => {
            let smoothing = if engine.no_smoothing {
                Smoothing::Off
            } else {
                Smoothing::Persistence(engine.persistence.unwrap_or(3))
            };
            (report.params_used, smoothing)
        }
        _ => engine.load()?,
    };
    let events_path = session_dir.join(EVENT_LOG);
    let mut pipeline = Pipeline::new(params, smoothing)
        .map_err(|e| CliError::config(e.to_string()))?;
    let mut push_error = None;
    replay_file(&events_path, 0.0, |event| {
        if push_error.is_none() {
            if let Err(e) = pipeline.push(event) {
                push_error = Some(e);
            }
        }
    })
    .map_err(|e| CliError::input(e.to_string()))?;
    if let Some(e) = push_error {
        return Err(CliError::runtime(e.to_string()));
    }
    let (_, report) = pipeline
        .finish()
        .map_err(|e| CliError::input(format!("no windows: {e}")))?;
    write_output(&report, out.as_deref())
}
