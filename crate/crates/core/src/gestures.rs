//! Click gestures derived from the distance between the two tapes.
//!
//! Calibration records the open-hand distance `D` and the pinched distance
//! `D'`. Each frame's tape distance `d` then falls into one of three regions:
//!
//! * `PINCH` (`d <= D'`): entering it is a left click; holding both tapes
//!   still for the dwell time is a double click.
//! * `MID` (`D' < d <= D`): holding the yellow tape still for the dwell time
//!   is a right click.
//! * `OPEN` (`d > D`): no clicks.
//!
//! Dwell timers run on frame timestamps so replays are deterministic.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::imaging::Point;
use crate::pointer::ScreenPoint;
use crate::tracking::{marker_distance, MarkerObservation};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("calibration needs {needed} frames with both tapes visible, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("pinched distance {pinch} must be smaller than open distance {open}")]
    Ordering { open: f64, pinch: f64 },
    #[error("calibration distances must be positive and finite (open {open}, pinch {pinch})")]
    NonPositive { open: f64, pinch: f64 },
}

/// The open-hand distance `D` and pinched distance `D'`, in camera pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    open: f64,
    pinch: f64,
}

impl Calibration {
    pub fn new(open: f64, pinch: f64) -> Result<Self, CalibrationError> {
        if !(open.is_finite() && pinch.is_finite() && open > 0.0 && pinch > 0.0) {
            return Err(CalibrationError::NonPositive { open, pinch });
        }
        if pinch >= open {
            return Err(CalibrationError::Ordering { open, pinch });
        }
        Ok(Self { open, pinch })
    }

    /// `D`
    pub fn open(&self) -> f64 {
        self.open
    }

    /// `D'`
    pub fn pinch(&self) -> f64 {
        self.pinch
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureConfig {
    pub dwell_ms: u64,
    /// Camera pixels a tape may wander from its dwell anchor.
    pub stationary_radius_px: f64,
    pub min_calibration_frames: usize,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            dwell_ms: 7000,
            stationary_radius_px: 5.0,
            min_calibration_frames: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Region {
    Open,
    Mid,
    Pinch,
    #[default]
    Undefined,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Open => "OPEN",
            Region::Mid => "MID",
            Region::Pinch => "PINCH",
            Region::Undefined => "UNDEFINED",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "OPEN" => Ok(Region::Open),
            "MID" => Ok(Region::Mid),
            "PINCH" => Ok(Region::Pinch),
            "UNDEFINED" => Ok(Region::Undefined),
            other => Err(format!("unknown region {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Move,
    LeftClick,
    RightClick,
    DoubleClick,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Move => "MOVE",
            EventKind::LeftClick => "LEFT_CLICK",
            EventKind::RightClick => "RIGHT_CLICK",
            EventKind::DoubleClick => "DOUBLE_CLICK",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MOVE" => Ok(EventKind::Move),
            "LEFT_CLICK" => Ok(EventKind::LeftClick),
            "RIGHT_CLICK" => Ok(EventKind::RightClick),
            "DOUBLE_CLICK" => Ok(EventKind::DoubleClick),
            other => Err(format!("unknown event kind {other:?}")),
        }
    }
}

/// A virtual mouse event. Renders as `<t_ms> <KIND> <x> <y>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MouseEvent {
    pub t_ms: u64,
    pub kind: EventKind,
    pub x: u32,
    pub y: u32,
}

impl MouseEvent {
    pub fn new(t_ms: u64, kind: EventKind, at: ScreenPoint) -> Self {
        Self {
            t_ms,
            kind,
            x: at.x,
            y: at.y,
        }
    }
}

impl fmt::Display for MouseEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.t_ms, self.kind, self.x, self.y)
    }
}

impl FromStr for MouseEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = s.split(' ').collect();
        let [t, kind, x, y] = fields[..] else {
            return Err(format!("expected 4 space-separated fields in {s:?}"));
        };
        let int = |v: &str| -> Result<u64, String> {
            if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
                return Err(format!("invalid integer {v:?}"));
            }
            v.parse().map_err(|e| format!("invalid integer {v:?}: {e}"))
        };
        let coord = |v: &str| -> Result<u32, String> {
            u32::try_from(int(v)?).map_err(|_| format!("coordinate out of range {v:?}"))
        };
        Ok(Self {
            t_ms: int(t)?,
            kind: kind.parse()?,
            x: coord(x)?,
            y: coord(y)?,
        })
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn calibration_distances(
    observations: &[(MarkerObservation, MarkerObservation)],
    cfg: &GestureConfig,
) -> Result<Vec<f64>, CalibrationError> {
    let distances: Vec<f64> = observations
        .iter()
        .filter_map(|(yellow, red)| marker_distance(yellow, red))
        .collect();
    let needed = cfg.min_calibration_frames.max(1);
    if distances.len() < needed {
        return Err(CalibrationError::TooFewFrames {
            needed,
            got: distances.len(),
        });
    }
    Ok(distances)
}

/// `D`: median tape distance over the open-hand frames.
pub fn calibrate_open(
    observations: &[(MarkerObservation, MarkerObservation)],
    cfg: &GestureConfig,
) -> Result<f64, CalibrationError> {
    let mut distances = calibration_distances(observations, cfg)?;
    let d = median(&mut distances);
    if d.is_nan() || d <= 0.0 {
        return Err(CalibrationError::NonPositive { open: d, pinch: f64::NAN });
    }
    Ok(d)
}

/// `D'`: median tape distance over the pinched frames, which must come out
/// below `open`.
pub fn calibrate_pinch(
    observations: &[(MarkerObservation, MarkerObservation)],
    cfg: &GestureConfig,
    open: f64,
) -> Result<f64, CalibrationError> {
    let mut distances = calibration_distances(observations, cfg)?;
    let pinch = median(&mut distances);
    Calibration::new(open, pinch).map(|c| c.pinch())
}

pub fn classify_region(d: f64, cal: &Calibration) -> Region {
    if d <= cal.pinch {
        Region::Pinch
    } else if d <= cal.open {
        Region::Mid
    } else {
        Region::Open
    }
}

/// Where a dwell timer started and whether it already fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellAnchor {
    pub yellow: Point,
    pub red: Point,
    pub start_ms: u64,
    pub fired: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GestureState {
    /// Region of the most recent frame.
    pub region: Region,
    /// Present only in `MID` and `PINCH`.
    pub dwell: Option<DwellAnchor>,
    /// Tape distance of the most recent frame.
    pub distance: Option<f64>,
}

impl GestureState {
    pub fn new() -> Self {
        Self::default()
    }

    /// True once the double click for the current pinch has fired.
    pub fn pinch_latched(&self) -> bool {
        self.region == Region::Pinch && self.dwell.is_some_and(|d| d.fired)
    }

    /// Milliseconds until the active dwell timer fires, `None` when no timer
    /// is armed.
    pub fn dwell_remaining_ms(&self, now_ms: u64, cfg: &GestureConfig) -> Option<u64> {
        let dwell = self.dwell.filter(|d| !d.fired)?;
        let elapsed = now_ms.saturating_sub(dwell.start_ms);
        Some(cfg.dwell_ms.saturating_sub(elapsed))
    }

    /// Advances the state machine by one frame.
    ///
    /// `pointer` is where click events are reported.
    pub fn step(
        &self,
        yellow: &MarkerObservation,
        red: &MarkerObservation,
        t_ms: u64,
        cal: &Calibration,
        cfg: &GestureConfig,
        pointer: ScreenPoint,
    ) -> (GestureState, Vec<MouseEvent>) {
        let (Some(y), Some(r)) = (yellow.centroid(), red.centroid()) else {
            return (GestureState::default(), Vec::new());
        };
        let d = y.distance(r);
        let region = classify_region(d, cal);
        let mut events = Vec::new();
        let fresh = |fired| DwellAnchor {
            yellow: y,
            red: r,
            start_ms: t_ms,
            fired,
        };

        let dwell = if region == Region::Open {
            None
        } else if region != self.region || self.dwell.is_none() {
            if region == Region::Pinch {
                events.push(MouseEvent::new(t_ms, EventKind::LeftClick, pointer));
            }
            Some(fresh(false))
        } else {
            let anchor = self.dwell.expect("checked above");
            let radius = cfg.stationary_radius_px;
            let still = match region {
                Region::Mid => y.distance(anchor.yellow) <= radius,
                _ => y.distance(anchor.yellow) <= radius && r.distance(anchor.red) <= radius,
            };
            if !still {
                // A wandering pinch restarts its timer but stays latched
                // until the pinch is released.
                Some(fresh(region == Region::Pinch && anchor.fired))
            } else if !anchor.fired && t_ms.saturating_sub(anchor.start_ms) >= cfg.dwell_ms {
                let kind = if region == Region::Mid {
                    EventKind::RightClick
                } else {
                    EventKind::DoubleClick
                };
                events.push(MouseEvent::new(t_ms, kind, pointer));
                Some(DwellAnchor { fired: true, ..anchor })
            } else {
                Some(anchor)
            }
        };

        let next = GestureState {
            region,
            dwell,
            distance: Some(d),
        };
        (next, events)
    }
}
