//! Single-session pipeline driver: window merging, optional label
//! smoothing, and scoring, fed one event at a time.

use classpulse_core::consistency::SessionSmoother;
use classpulse_core::engine::{Engine, EngineError};
use classpulse_core::windowing::{DropCounters, SourceId, StreamMerger};
use classpulse_core::{DetectionEvent, EngineParams, SessionReport, WindowAggregate, WindowBatch};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("{0}")]
    Smoothing(#[from] classpulse_core::consistency::SmoothError),
}

/// Label smoothing setting for a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Hysteresis with the given persistence count.
    Persistence(u32),
    /// Labels pass through untouched.
    Off,
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::Persistence(3)
    }
}

fn untraced(pairs: Vec<(WindowBatch, WindowAggregate)>) -> Vec<WindowAggregate> {
    pairs.into_iter().map(|(_, aggregate)| aggregate).collect()
}

/// Streams events through merge, smoothing, and scoring for one session.
pub struct Pipeline {
    merger: StreamMerger,
    smoother: Option<SessionSmoother>,
    engine: Engine,
    default_source: Option<SourceId>,
}

impl Pipeline {
    pub fn new(params: EngineParams, smoothing: Smoothing) -> Result<Self, PipelineError> {
        let merger = StreamMerger::new(params.window_ms, params.theta);
        let smoother = match smoothing {
            Smoothing::Persistence(m) => Some(SessionSmoother::new(m)?),
            Smoothing::Off => None,
        };
        Ok(Pipeline {
            merger,
            smoother,
            engine: Engine::new(params),
            default_source: None,
        })
    }

    /// Registers an additional event source (one per producer connection).
    pub fn add_source(&mut self) -> SourceId {
        self.merger.add_source()
    }

    pub fn drop_counters(&self) -> Arc<DropCounters> {
        self.merger.counters()
    }

    /// Feeds one event from a specific source.
    pub fn push_from(
        &mut self,
        source: SourceId,
        event: DetectionEvent,
    ) -> Result<Vec<WindowAggregate>, PipelineError> {
        Ok(untraced(self.push_from_traced(source, event)?))
    }

    /// Like [`Pipeline::push_from`] but also returns each emitted window's
    /// merged (pre-smoothing) batch, for persistence.
    pub fn push_from_traced(
        &mut self,
        source: SourceId,
        event: DetectionEvent,
    ) -> Result<Vec<(WindowBatch, WindowAggregate)>, PipelineError> {
        let batches = self.merger.push(source, event);
        self.process(batches)
    }

    /// Feeds one event on the implicit single source (file replay).
    pub fn push(&mut self, event: DetectionEvent) -> Result<Vec<WindowAggregate>, PipelineError> {
        let source = match self.default_source {
            Some(s) => s,
            None => {
                let s = self.merger.add_source();
                self.default_source = Some(s);
                s
            }
        };
        self.push_from(source, event)
    }

    /// Marks one source as finished.
    pub fn end_source(&mut self, source: SourceId) -> Result<Vec<WindowAggregate>, PipelineError> {
        Ok(untraced(self.end_source_traced(source)?))
    }

    /// Traced variant of [`Pipeline::end_source`].
    pub fn end_source_traced(
        &mut self,
        source: SourceId,
    ) -> Result<Vec<(WindowBatch, WindowAggregate)>, PipelineError> {
        let batches = self.merger.end_source(source);
        self.process(batches)
    }

    fn process(
        &mut self,
        batches: Vec<WindowBatch>,
    ) -> Result<Vec<(WindowBatch, WindowAggregate)>, PipelineError> {
        let mut out = Vec::with_capacity(batches.len());
        for batch in batches {
            let scored = match &mut self.smoother {
                Some(s) => s.smooth_batch(&batch),
                None => batch.clone(),
            };
            let aggregate = self.engine.process_window(&scored)?;
            out.push((batch, aggregate));
        }
        Ok(out)
    }

    /// Flushes pending windows and produces the session report.
    pub fn finish(self) -> Result<(Vec<WindowAggregate>, SessionReport), PipelineError> {
        let (tail, report) = self.finish_traced()?;
        Ok((untraced(tail), report))
    }

    /// Traced variant of [`Pipeline::finish`].
    pub fn finish_traced(
        mut self,
    ) -> Result<(Vec<(WindowBatch, WindowAggregate)>, SessionReport), PipelineError> {
        let batches = self.merger.finish();
        let tail = self.process(batches)?;
        let report = self.engine.finish()?;
        Ok((tail, report))
    }
}
