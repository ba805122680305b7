//! Per-frame composition of the stages: segmentation, tape extraction,
//! cursor mapping and gesture recognition.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::gestures::{Calibration, EventKind, GestureConfig, GestureState, MouseEvent, Region};
use crate::imaging::Frame;
use crate::pointer::{PointerMode, PointerSettings, PointerState, Resolution};
use crate::segmentation::{
    color_mask, denoise, skin_mask_within, subtract_background, BackgroundModel, BinaryMask, ColorTarget,
    SegmentationError, SkinHistogram,
};
use crate::tracking::{extract_marker, scaled_min_blob_area, Connectivity, MarkerId, MarkerObservation};

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("frame is {actual:?} but the pipeline expects {expected:?}")]
    FrameSize { expected: (u32, u32), actual: (u32, u32) },
    #[error("frame timestamp {current} ms precedes previous frame at {previous} ms")]
    TimestampRegression { previous: u64, current: u64 },
    #[error("skin stage is enabled but no histogram was supplied")]
    SkinHistogramMissing,
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
}

/// Every tunable of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub camera: Resolution,
    pub screen: Resolution,
    pub fps: f64,
    pub mode: PointerMode,
    pub yellow_target: ColorTarget,
    pub red_target: ColorTarget,
    pub bg_threshold: u8,
    /// Leading frames of a stream averaged into the background model.
    pub background_frames: usize,
    pub skin_enabled: bool,
    pub skin_histogram_path: Option<PathBuf>,
    pub skin_theta: f64,
    pub denoise_window: usize,
    pub denoise_majority: f64,
    /// Minimum tape blob area at 640x480; rescaled for other resolutions.
    pub min_blob_area: u32,
    pub connectivity: Connectivity,
    pub gesture: GestureConfig,
    pub gain: f64,
    pub exponent: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            camera: Resolution::new(640, 480),
            screen: Resolution::new(1920, 1080),
            fps: 30.0,
            mode: PointerMode::Absolute,
            yellow_target: ColorTarget::YELLOW,
            red_target: ColorTarget::RED,
            bg_threshold: 25,
            background_frames: 2,
            skin_enabled: false,
            skin_histogram_path: None,
            skin_theta: 0.5,
            denoise_window: 3,
            denoise_majority: 0.5,
            min_blob_area: 20,
            connectivity: Connectivity::Eight,
            gesture: GestureConfig::default(),
            gain: 1.5,
            exponent: 1.3,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let fail = |m: String| Err(EngineError::Config(m));
        if !self.camera.is_valid() || !self.screen.is_valid() {
            return fail("camera and screen resolutions must be at least 1x1".into());
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return fail(format!("fps must be positive, got {}", self.fps));
        }
        for (name, target) in [("yellow", &self.yellow_target), ("red", &self.red_target)] {
            if let Err(e) = target.validate() {
                return fail(format!("{name} target: {e}"));
            }
        }
        if !(0.0..=1.0).contains(&self.skin_theta) {
            return fail(format!("skin theta must lie in [0, 1], got {}", self.skin_theta));
        }
        if self.denoise_window == 0 || self.denoise_window.is_multiple_of(2) {
            return fail(format!("denoise window must be odd, got {}", self.denoise_window));
        }
        if !(self.denoise_majority > 0.0 && self.denoise_majority <= 1.0) {
            return fail(format!("denoise majority must lie in (0, 1], got {}", self.denoise_majority));
        }
        if self.gesture.dwell_ms == 0 {
            return fail("gesture.dwell_ms must be positive".into());
        }
        if self.gesture.stationary_radius_px.is_nan() || self.gesture.stationary_radius_px < 0.0 {
            return fail("gesture.stationary_radius_px must be non-negative".into());
        }
        if !(self.gain.is_finite() && self.exponent.is_finite()) {
            return fail("speed gain and exponent must be finite".into());
        }
        Ok(())
    }

    /// Stream timestamp of the `index`-th frame: `floor(index * 1000 / fps)`.
    pub fn frame_timestamp(&self, index: u64) -> u64 {
        (index as f64 * 1000.0 / self.fps).floor() as u64
    }

    pub fn pointer_settings(&self) -> PointerSettings {
        PointerSettings {
            mode: self.mode,
            camera: self.camera,
            screen: self.screen,
            gain: self.gain,
            exponent: self.exponent,
        }
    }
}

/// Wall time spent in each stage, summed over frames.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub background: Duration,
    pub skin: Duration,
    pub color: Duration,
    pub denoise: Duration,
    pub tracking: Duration,
    pub gestures: Duration,
}

impl StageTimings {
    pub const STAGE_NAMES: [&'static str; 6] = ["background", "skin", "color", "denoise", "tracking", "gestures"];

    pub fn as_array(&self) -> [Duration; 6] {
        [
            self.background,
            self.skin,
            self.color,
            self.denoise,
            self.tracking,
            self.gestures,
        ]
    }

    pub fn total(&self) -> Duration {
        self.as_array().iter().sum()
    }
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}

/// Both tape observations for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub yellow: MarkerObservation,
    pub red: MarkerObservation,
}

/// Segmentation and tape extraction, without any temporal state.
#[derive(Debug, Clone)]
pub struct Detector {
    config: PipelineConfig,
    background: Option<BackgroundModel>,
    skin: Option<SkinHistogram>,
    min_area: u32,
}

impl Detector {
    pub fn new(config: PipelineConfig, skin: Option<SkinHistogram>) -> Result<Self, EngineError> {
        config.validate()?;
        if config.skin_enabled && skin.is_none() {
            return Err(EngineError::SkinHistogramMissing);
        }
        let min_area = scaled_min_blob_area(config.min_blob_area, config.camera.width, config.camera.height);
        Ok(Self {
            config,
            background: None,
            skin,
            min_area,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Installs the static-scene model. Without one, every pixel counts as
    /// foreground.
    pub fn set_background(&mut self, model: BackgroundModel) -> Result<(), EngineError> {
        let expected = (self.config.camera.width, self.config.camera.height);
        if model.dimensions() != expected {
            return Err(EngineError::FrameSize {
                expected,
                actual: model.dimensions(),
            });
        }
        self.background = Some(model);
        Ok(())
    }

    pub fn background(&self) -> Option<&BackgroundModel> {
        self.background.as_ref()
    }

    fn check_frame(&self, frame: &Frame) -> Result<(), EngineError> {
        let expected = (self.config.camera.width, self.config.camera.height);
        if frame.dimensions() != expected {
            return Err(EngineError::FrameSize {
                expected,
                actual: frame.dimensions(),
            });
        }
        Ok(())
    }

    pub fn detect(&self, frame: &Frame) -> Result<Detection, EngineError> {
        self.detect_timed(frame, &mut StageTimings::default())
    }

    pub fn detect_timed(&self, frame: &Frame, timings: &mut StageTimings) -> Result<Detection, EngineError> {
        self.check_frame(frame)?;
        let cfg = &self.config;

        let foreground = timed(&mut timings.background, || {
            self.background
                .as_ref()
                .map(|bg| subtract_background(frame, bg, cfg.bg_threshold))
                .transpose()
        })?;

        let restrict: Option<BinaryMask> = match (&self.skin, cfg.skin_enabled) {
            (Some(hist), true) => Some(timed(&mut timings.skin, || {
                skin_mask_within(frame, hist, cfg.skin_theta, foreground.as_ref())
            })?),
            _ => foreground,
        };

        let (yellow, red) = timed(&mut timings.color, || -> Result<_, SegmentationError> {
            Ok((
                color_mask(frame, &cfg.yellow_target, restrict.as_ref())?,
                color_mask(frame, &cfg.red_target, restrict.as_ref())?,
            ))
        })?;

        let (yellow, red) = timed(&mut timings.denoise, || -> Result<_, SegmentationError> {
            Ok((
                denoise(&yellow, cfg.denoise_window, cfg.denoise_majority)?,
                denoise(&red, cfg.denoise_window, cfg.denoise_majority)?,
            ))
        })?;

        Ok(timed(&mut timings.tracking, || Detection {
            yellow: extract_marker(&yellow, MarkerId::Yellow, self.min_area, cfg.connectivity),
            red: extract_marker(&red, MarkerId::Red, self.min_area, cfg.connectivity),
        }))
    }
}

/// What one frame produced.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub t_ms: u64,
    /// MOVE first, then any clicks.
    pub events: Vec<MouseEvent>,
    pub detection: Detection,
    pub region: Region,
    pub distance: Option<f64>,
    pub dwell_remaining_ms: Option<u64>,
}

/// A calibrated pipeline instance owning the cursor and gesture state of one
/// stream.
#[derive(Debug, Clone)]
pub struct Engine {
    detector: Detector,
    calibration: Calibration,
    pointer: PointerState,
    gesture: GestureState,
    last_timestamp: Option<u64>,
}

impl Engine {
    pub fn new(detector: Detector, calibration: Calibration) -> Self {
        let pointer = PointerState::new(detector.config.screen);
        Self {
            detector,
            calibration,
            pointer,
            gesture: GestureState::new(),
            last_timestamp: None,
        }
    }

    pub fn detector(&self) -> &Detector {
        &self.detector
    }

    pub fn detector_mut(&mut self) -> &mut Detector {
        &mut self.detector
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn pointer(&self) -> &PointerState {
        &self.pointer
    }

    pub fn gesture(&self) -> &GestureState {
        &self.gesture
    }

    pub fn process(&mut self, frame: &Frame) -> Result<FrameOutput, EngineError> {
        self.process_timed(frame, &mut StageTimings::default())
    }

    pub fn process_timed(&mut self, frame: &Frame, timings: &mut StageTimings) -> Result<FrameOutput, EngineError> {
        let t_ms = frame.timestamp_ms();
        if let Some(previous) = self.last_timestamp.filter(|&p| p > t_ms) {
            return Err(EngineError::TimestampRegression { previous, current: t_ms });
        }
        let detection = self.detector.detect_timed(frame, timings)?;
        self.last_timestamp = Some(t_ms);

        let cfg = &self.detector.config;
        let (output, pointer, gesture) = timed(&mut timings.gestures, || {
            let mut events = Vec::new();
            let (pointer, moved) = self.pointer.step(&detection.yellow, &cfg.pointer_settings());
            if let Some(at) = moved {
                events.push(MouseEvent::new(t_ms, EventKind::Move, at));
            }
            let (gesture, clicks) = self.gesture.step(
                &detection.yellow,
                &detection.red,
                t_ms,
                &self.calibration,
                &cfg.gesture,
                pointer.screen_pos,
            );
            events.extend(clicks);
            let output = FrameOutput {
                t_ms,
                events,
                detection,
                region: gesture.region,
                distance: gesture.distance,
                dwell_remaining_ms: gesture.dwell_remaining_ms(t_ms, &cfg.gesture),
            };
            (output, pointer, gesture)
        });
        self.pointer = pointer;
        self.gesture = gesture;
        Ok(output)
    }
}
