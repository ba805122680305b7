//! Per-connection state of the frame-stream service, independent of the
//! transport.
//!
//! A session moves between phases driven by client control messages:
//!
//! * idle: frames are kept as background candidates (the most recent
//!   `background_frames` of them);
//! * open / pinch calibration: frames are collected until the matching
//!   `*_END`, which answers `CAL_OPEN <D>` or `CAL_PINCH <D'>`;
//! * streaming: every frame answers its `EVT` lines followed by one `STATE`
//!   line. Without idle background frames the first `background_frames`
//!   streamed frames become the background, exactly as a replay does.
//!
//! Sequencing mistakes and malformed frames end the session with an `ERR`.
//! Calibration failures only answer `ERR CALIBRATION` so the step can be
//! retried.

use std::collections::VecDeque;

use tapemouse_core::gestures::{calibrate_open, calibrate_pinch};
use tapemouse_core::segmentation::capture_background;
use tapemouse_core::{Calibration, Detector, Frame, PipelineConfig, Region};

use crate::error::Result;
use crate::pipeline::{build_detector, Stream};
use crate::protocol::{codes, decode_frame, Control, Reply};

/// Replies to send, and whether the session must close afterwards.
#[derive(Debug, Default, PartialEq)]
pub struct Outcome {
    pub replies: Vec<Reply>,
    pub close: bool,
}

impl Outcome {
    fn reply(reply: Reply) -> Self {
        Self {
            replies: vec![reply],
            close: false,
        }
    }

    fn fatal(code: &str, detail: impl std::fmt::Display) -> Self {
        Self {
            replies: vec![Reply::error(code, detail)],
            close: true,
        }
    }
}

enum Phase {
    Idle,
    CalibratingOpen(Vec<Frame>),
    CalibratingPinch(Vec<Frame>),
    Streaming(Box<Stream>),
}

impl Phase {
    fn name(&self) -> &'static str {
        match self {
            Phase::Idle => "idle",
            Phase::CalibratingOpen(_) => "open calibration",
            Phase::CalibratingPinch(_) => "pinch calibration",
            Phase::Streaming(_) => "streaming",
        }
    }
}

pub struct Session {
    config: PipelineConfig,
    /// Detector used for calibration frames; carries the idle background.
    detector: Detector,
    idle_frames: VecDeque<Frame>,
    open_distance: Option<f64>,
    calibration: Option<Calibration>,
    phase: Phase,
}

impl Session {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        let detector = build_detector(&config)?;
        Ok(Self {
            config,
            detector,
            idle_frames: VecDeque::new(),
            open_distance: None,
            calibration: None,
            phase: Phase::Idle,
        })
    }

    pub fn calibration(&self) -> Option<Calibration> {
        self.calibration
    }

    pub fn handle_text(&mut self, text: &str) -> Outcome {
        match text.parse::<Control>() {
            Ok(control) => self.handle_control(control),
            Err(e) => Outcome::fatal(codes::PROTOCOL, e),
        }
    }

    fn violation(&self, control: Control) -> Outcome {
        Outcome::fatal(codes::PROTOCOL, format!("{control} not allowed during {}", self.phase.name()))
    }

    /// Rebuilds the calibration detector's background from idle frames.
    fn refresh_background(&mut self) -> std::result::Result<(), String> {
        if self.idle_frames.is_empty() {
            return Ok(());
        }
        let frames: Vec<Frame> = self.idle_frames.iter().cloned().collect();
        let model = capture_background(&frames).map_err(|e| e.to_string())?;
        self.detector.set_background(model).map_err(|e| e.to_string())
    }

    fn handle_control(&mut self, control: Control) -> Outcome {
        match (control, &mut self.phase) {
            (Control::StreamEnd, _) => {
                self.phase = Phase::Idle;
                Outcome::default()
            }
            (Control::CalibrateOpenBegin, Phase::Idle) => {
                if let Err(e) = self.refresh_background() {
                    return Outcome::fatal(codes::PIPELINE, e);
                }
                self.phase = Phase::CalibratingOpen(Vec::new());
                Outcome::default()
            }
            (Control::CalibratePinchBegin, Phase::Idle) => {
                if self.open_distance.is_none() {
                    return Outcome::fatal(codes::NOT_CALIBRATED, "open-hand calibration must come first");
                }
                if let Err(e) = self.refresh_background() {
                    return Outcome::fatal(codes::PIPELINE, e);
                }
                self.phase = Phase::CalibratingPinch(Vec::new());
                Outcome::default()
            }
            (Control::CalibrateOpenEnd, Phase::CalibratingOpen(frames)) => {
                let frames = std::mem::take(frames);
                self.phase = Phase::Idle;
                match self.observe(&frames).and_then(|pairs| {
                    calibrate_open(&pairs, &self.config.gesture).map_err(|e| e.to_string())
                }) {
                    Ok(open) => {
                        self.open_distance = Some(open);
                        self.calibration = None;
                        Outcome::reply(Reply::CalOpen(open))
                    }
                    Err(e) => Outcome::reply(Reply::error(codes::CALIBRATION, e)),
                }
            }
            (Control::CalibratePinchEnd, Phase::CalibratingPinch(frames)) => {
                let frames = std::mem::take(frames);
                self.phase = Phase::Idle;
                let open = self.open_distance.expect("pinch phase requires an open distance");
                match self.observe(&frames).and_then(|pairs| {
                    calibrate_pinch(&pairs, &self.config.gesture, open).map_err(|e| e.to_string())
                }) {
                    Ok(pinch) => {
                        self.calibration = Calibration::new(open, pinch).ok();
                        Outcome::reply(Reply::CalPinch(pinch))
                    }
                    Err(e) => Outcome::reply(Reply::error(codes::CALIBRATION, e)),
                }
            }
            (Control::StreamBegin, Phase::Idle) => {
                let Some(calibration) = self.calibration else {
                    return Outcome::fatal(codes::NOT_CALIBRATED, "calibrate before STREAM_BEGIN");
                };
                let mut detector = match build_detector(&self.config) {
                    Ok(d) => d,
                    Err(e) => return Outcome::fatal(codes::PIPELINE, e),
                };
                if !self.idle_frames.is_empty() {
                    let frames: Vec<Frame> = self.idle_frames.iter().cloned().collect();
                    let installed = capture_background(&frames)
                        .map_err(|e| e.to_string())
                        .and_then(|m| detector.set_background(m).map_err(|e| e.to_string()));
                    if let Err(e) = installed {
                        return Outcome::fatal(codes::PIPELINE, e);
                    }
                }
                self.phase = Phase::Streaming(Box::new(Stream::new(detector, calibration)));
                Outcome::default()
            }
            (control, _) => self.violation(control),
        }
    }

    fn observe(
        &self,
        frames: &[Frame],
    ) -> std::result::Result<Vec<(tapemouse_core::MarkerObservation, tapemouse_core::MarkerObservation)>, String> {
        frames
            .iter()
            .map(|f| {
                self.detector
                    .detect(f)
                    .map(|d| (d.yellow, d.red))
                    .map_err(|e| e.to_string())
            })
            .collect()
    }

    pub fn handle_binary(&mut self, msg: &[u8]) -> Outcome {
        let frame = match decode_frame(msg) {
            Ok(f) => f,
            Err(e) => return Outcome::fatal(codes::BAD_FRAME, e),
        };
        let expected = (self.config.camera.width, self.config.camera.height);
        if frame.dimensions() != expected {
            return Outcome::fatal(
                codes::BAD_FRAME,
                format!("frame is {:?}, session expects {:?}", frame.dimensions(), expected),
            );
        }
        match &mut self.phase {
            Phase::Idle => {
                let keep = self.config.background_frames.max(1);
                self.idle_frames.push_back(frame);
                while self.idle_frames.len() > keep {
                    self.idle_frames.pop_front();
                }
                Outcome::default()
            }
            Phase::CalibratingOpen(frames) | Phase::CalibratingPinch(frames) => {
                frames.push(frame);
                Outcome::default()
            }
            Phase::Streaming(stream) => match stream.push(frame) {
                Ok(Some(out)) => {
                    let mut replies: Vec<Reply> = out.events.into_iter().map(Reply::Event).collect();
                    replies.push(Reply::State {
                        region: out.region,
                        distance: out.distance,
                        dwell_remaining_ms: out.dwell_remaining_ms,
                    });
                    Outcome { replies, close: false }
                }
                Ok(None) => Outcome::reply(Reply::State {
                    region: Region::Undefined,
                    distance: None,
                    dwell_remaining_ms: None,
                }),
                Err(e) => Outcome::fatal(codes::PIPELINE, e),
            },
        }
    }
}
