//! Camera-to-screen cursor mapping.
//!
//! Two modes are supported: absolute position mapping, where the tape's
//! camera position scales straight onto the screen, and weighted-speed
//! mapping, where the cursor moves by a power-law gain of the inter-frame
//! displacement.

use std::fmt;
use std::str::FromStr;

use crate::imaging::Point;
use crate::tracking::MarkerObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub fn is_valid(&self) -> bool {
        self.width >= 1 && self.height >= 1
    }

    pub fn center(&self) -> ScreenPoint {
        ScreenPoint::new(self.width / 2, self.height / 2)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScreenPoint {
    pub x: u32,
    pub y: u32,
}

impl ScreenPoint {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointerMode {
    #[default]
    Absolute,
    Speed,
}

impl fmt::Display for PointerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointerMode::Absolute => "absolute",
            PointerMode::Speed => "speed",
        })
    }
}

impl FromStr for PointerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "absolute" => Ok(PointerMode::Absolute),
            "speed" => Ok(PointerMode::Speed),
            other => Err(format!("unknown pointer mode {other:?}")),
        }
    }
}

fn clamp_axis(v: f64, len: u32) -> u32 {
    // NaN maps to 0 through the saturating cast.
    (v.max(0.0) as u64).min(len as u64 - 1) as u32
}

/// `floor(x * sw / cw)`, `floor(y * sh / ch)`, clamped to the screen.
///
/// Flooring keeps the step between neighbouring camera pixels at exactly
/// `sw / cw` screen pixels when that ratio is integral.
pub fn map_absolute(cam_pt: Point, cam_res: Resolution, screen_res: Resolution) -> ScreenPoint {
    let sx = (cam_pt.x * screen_res.width as f64 / cam_res.width as f64).floor();
    let sy = (cam_pt.y * screen_res.height as f64 / cam_res.height as f64).floor();
    ScreenPoint::new(clamp_axis(sx, screen_res.width), clamp_axis(sy, screen_res.height))
}

/// `gain * |v|^(exponent-1) * v`, rounded per axis, with `v = cur - prev`.
pub fn map_weighted_speed(prev: Point, cur: Point, gain: f64, exponent: f64) -> (i64, i64) {
    let (vx, vy) = (cur.x - prev.x, cur.y - prev.y);
    let magnitude = vx.hypot(vy);
    if magnitude == 0.0 {
        return (0, 0);
    }
    let scale = gain * magnitude.powf(exponent - 1.0);
    ((scale * vx).round() as i64, (scale * vy).round() as i64)
}

/// Settings for [`PointerState::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerSettings {
    pub mode: PointerMode,
    pub camera: Resolution,
    pub screen: Resolution,
    pub gain: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerState {
    pub screen_pos: ScreenPoint,
    pub prev_cam_pos: Option<Point>,
}

impl PointerState {
    /// Cursor parked at the centre of the screen.
    pub fn new(screen: Resolution) -> Self {
        Self {
            screen_pos: screen.center(),
            prev_cam_pos: None,
        }
    }

    /// Advances the cursor for one observation of the yellow tape.
    ///
    /// Returns the new state and the new screen position when it changed.
    pub fn step(self, yellow: &MarkerObservation, settings: &PointerSettings) -> (Self, Option<ScreenPoint>) {
        let Some(cam) = yellow.centroid() else {
            return (self, None);
        };
        let screen_pos = match settings.mode {
            PointerMode::Absolute => map_absolute(cam, settings.camera, settings.screen),
            PointerMode::Speed => {
                let (dx, dy) = self
                    .prev_cam_pos
                    .map_or((0, 0), |prev| map_weighted_speed(prev, cam, settings.gain, settings.exponent));
                let x = (self.screen_pos.x as i64 + dx).clamp(0, settings.screen.width as i64 - 1);
                let y = (self.screen_pos.y as i64 + dy).clamp(0, settings.screen.height as i64 - 1);
                ScreenPoint::new(x as u32, y as u32)
            }
        };
        let next = Self {
            screen_pos,
            prev_cam_pos: Some(cam),
        };
        let moved = (screen_pos != self.screen_pos).then_some(screen_pos);
        (next, moved)
    }
}
