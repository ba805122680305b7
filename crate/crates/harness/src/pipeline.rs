//! Whole-stream drivers: replay, calibration and benchmarking.

use std::fmt;
use std::time::{Duration, Instant};

use tapemouse_core::gestures::{calibrate_open, calibrate_pinch};
use tapemouse_core::segmentation::capture_background;
use tapemouse_core::{
    BackgroundModel, Calibration, Detector, Engine, Frame, FrameOutput, PipelineConfig, SkinHistogram, StageTimings,
};

use crate::error::{HarnessError, Result};
use crate::eventlog::EventLog;

/// Builds a detector, loading the skin histogram when the skin stage is on.
pub fn build_detector(config: &PipelineConfig) -> Result<Detector> {
    let skin = match (&config.skin_histogram_path, config.skin_enabled) {
        (Some(path), true) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            Some(SkinHistogram::from_text(&text)?)
        }
        _ => None,
    };
    Ok(Detector::new(config.clone(), skin)?)
}

/// One stream's engine. The first `background_frames` frames it sees are
/// averaged into the background model unless a model was installed up front.
pub struct Stream {
    engine: Engine,
    pending_background: Vec<Frame>,
    background_frames: usize,
}

impl Stream {
    pub fn new(detector: Detector, calibration: Calibration) -> Self {
        let background_frames = if detector.background().is_some() {
            0
        } else {
            detector.config().background_frames
        };
        Self {
            engine: Engine::new(detector, calibration),
            pending_background: Vec::new(),
            background_frames,
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// `None` while the frame is consumed by background capture.
    pub fn push(&mut self, frame: Frame) -> Result<Option<FrameOutput>> {
        self.push_timed(frame, &mut StageTimings::default())
    }

    pub fn push_timed(&mut self, frame: Frame, timings: &mut StageTimings) -> Result<Option<FrameOutput>> {
        if self.pending_background.len() < self.background_frames {
            self.pending_background.push(frame);
            if self.pending_background.len() == self.background_frames {
                let model = capture_background(&self.pending_background)?;
                self.engine.detector_mut().set_background(model)?;
            }
            return Ok(None);
        }
        Ok(Some(self.engine.process_timed(&frame, timings)?))
    }

    pub fn capturing_background(&self) -> bool {
        self.pending_background.len() < self.background_frames
    }
}

/// Replays frames through a calibrated pipeline and collects every event.
pub fn run_pipeline<I>(frames: I, config: &PipelineConfig, calibration: Calibration) -> Result<EventLog>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut stream = Stream::new(build_detector(config)?, calibration);
    let mut log = EventLog::new();
    for frame in frames {
        if let Some(out) = stream.push(frame?)? {
            log.extend(out.events);
        }
    }
    Ok(log)
}

fn collect_pairs(
    detector: &Detector,
    frames: impl IntoIterator<Item = Result<Frame>>,
) -> Result<Vec<(tapemouse_core::MarkerObservation, tapemouse_core::MarkerObservation)>> {
    frames
        .into_iter()
        .map(|f| {
            let det = detector.detect(&f?)?;
            Ok((det.yellow, det.red))
        })
        .collect()
}

/// Measures `D` from open-hand frames and `D'` from pinched frames.
pub fn run_calibration<I, J>(
    open_frames: I,
    pinch_frames: J,
    config: &PipelineConfig,
    background: Option<BackgroundModel>,
) -> Result<Calibration>
where
    I: IntoIterator<Item = Result<Frame>>,
    J: IntoIterator<Item = Result<Frame>>,
{
    let mut detector = build_detector(config)?;
    if let Some(bg) = background {
        detector.set_background(bg)?;
    }
    let open_pairs = collect_pairs(&detector, open_frames)?;
    let pinch_pairs = collect_pairs(&detector, pinch_frames)?;
    for (what, pairs) in [("open-hand calibration", &open_pairs), ("pinch calibration", &pinch_pairs)] {
        if pairs.is_empty() {
            return Err(HarnessError::TooFewFrames { what, needed: 1, got: 0 });
        }
    }
    let open = calibrate_open(&open_pairs, &config.gesture)?;
    let pinch = calibrate_pinch(&pinch_pairs, &config.gesture, open)?;
    Ok(Calibration::new(open, pinch)?)
}

pub const MIN_BENCH_FRAMES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Frames that went through the full pipeline (background capture excluded).
    pub frames: usize,
    /// Processing time summed over those frames; frame loading is not counted.
    pub elapsed: Duration,
    pub fps: f64,
    pub timings: StageTimings,
}

impl BenchReport {
    /// Mean milliseconds per frame for each stage, in pipeline order.
    pub fn stage_means_ms(&self) -> Vec<(&'static str, f64)> {
        let n = self.frames.max(1) as f64;
        StageTimings::STAGE_NAMES
            .iter()
            .zip(self.timings.as_array())
            .map(|(name, d)| (*name, d.as_secs_f64() * 1000.0 / n))
            .collect()
    }

    pub fn mean_frame_ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1000.0 / self.frames.max(1) as f64
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "frames      {}", self.frames)?;
        writeln!(f, "elapsed_ms  {:.3}", self.elapsed.as_secs_f64() * 1000.0)?;
        writeln!(f, "fps         {:.2}", self.fps)?;
        writeln!(f, "frame_ms    {:.3}", self.mean_frame_ms())?;
        for (name, ms) in self.stage_means_ms() {
            writeln!(f, "stage_ms    {name:<11} {ms:.3}")?;
        }
        Ok(())
    }
}

/// Times the full pipeline per frame. A nominal calibration is used when
/// none is given, since gesture cost does not depend on it.
pub fn bench<I>(frames: I, config: &PipelineConfig, calibration: Option<Calibration>) -> Result<BenchReport>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let calibration = match calibration {
        Some(c) => c,
        None => Calibration::new(200.0, 40.0)?,
    };
    let mut stream = Stream::new(build_detector(config)?, calibration);
    let mut timings = StageTimings::default();
    let mut elapsed = Duration::ZERO;
    let mut processed = 0usize;
    for frame in frames {
        let frame = frame?;
        if stream.capturing_background() {
            stream.push(frame)?;
            continue;
        }
        let start = Instant::now();
        stream.push_timed(frame, &mut timings)?;
        elapsed += start.elapsed();
        processed += 1;
    }
    if processed < MIN_BENCH_FRAMES {
        return Err(HarnessError::TooFewFrames {
            what: "bench",
            needed: MIN_BENCH_FRAMES,
            got: processed,
        });
    }
    let fps = processed as f64 / elapsed.as_secs_f64();
    Ok(BenchReport {
        frames: processed,
        elapsed,
        fps,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tapemouse_core::imaging::{synth_frame, DiskSpec};

    fn blank(t: u64) -> Result<Frame> {
        Ok(synth_frame(64, 48, [30, 30, 30], &[], t).unwrap())
    }

    fn small_config() -> PipelineConfig {
        PipelineConfig {
            camera: tapemouse_core::Resolution::new(64, 48),
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn empty_source_gives_empty_log() {
        let cal = Calibration::new(200.0, 40.0).unwrap();
        let log = run_pipeline(std::iter::empty(), &PipelineConfig::default(), cal).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn dimension_drift_is_an_error() {
        let cal = Calibration::new(20.0, 4.0).unwrap();
        let frames = vec![blank(0), blank(33), blank(66), Ok(Frame::filled(32, 48, [0, 0, 0], 99).unwrap())];
        let err = run_pipeline(frames, &small_config(), cal).unwrap_err();
        assert!(matches!(err, HarnessError::Engine(_)), "{err}");
    }

    #[test]
    fn background_frames_are_consumed_first() {
        let cal = Calibration::new(20.0, 4.0).unwrap();
        let mut stream = Stream::new(build_detector(&small_config()).unwrap(), cal);
        assert!(stream.push(blank(0).unwrap()).unwrap().is_none());
        assert!(stream.push(blank(33).unwrap()).unwrap().is_none());
        assert!(!stream.capturing_background());
        assert!(stream.push(blank(66).unwrap()).unwrap().is_some());
    }

    #[test]
    fn calibration_needs_both_sets() {
        let cfg = small_config();
        let frame = |d: f64| {
            Ok(synth_frame(
                64,
                48,
                [30, 30, 30],
                &[DiskSpec::new(10.0, 20.0, 4.0, [255, 255, 0]), DiskSpec::new(10.0 + d, 20.0, 4.0, [255, 0, 0])],
                0,
            )
            .unwrap())
        };
        let cfg = PipelineConfig { min_blob_area: 100, ..cfg };
        let open: Vec<_> = (0..10).map(|_| frame(40.0)).collect();
        let pinch: Vec<_> = (0..10).map(|_| frame(12.0)).collect();
        let cal = run_calibration(open.iter().map(|f| Ok(f.as_ref().unwrap().clone())), pinch, &cfg, None).unwrap();
        assert_eq!((cal.open(), cal.pinch()), (40.0, 12.0));
        let err = run_calibration(open, std::iter::empty(), &cfg, None).unwrap_err();
        assert!(matches!(err, HarnessError::TooFewFrames { .. }), "{err}");
    }

    #[test]
    fn bench_requires_enough_frames() {
        let err = bench((0..50).map(|i| blank(i * 33)), &small_config(), None).unwrap_err();
        assert!(matches!(err, HarnessError::TooFewFrames { needed: 100, .. }));
        let report = bench((0..120).map(|i| blank(i * 33)), &small_config(), None).unwrap();
        assert_eq!(report.frames, 118);
        let implied = report.fps * report.elapsed.as_secs_f64();
        assert!((implied - report.frames as f64).abs() < 1e-6);
        assert!(report.timings.total() <= report.elapsed);
    }
}
