//! Wire format of the frame-stream service.
//!
//! Binary messages carry one frame:
//!
//! ```text
//! [0x01][width: u16 BE][height: u16 BE][timestamp_ms: u64 BE][RGB8 payload]
//! ```
//!
//! Text messages carry control commands from the client and replies from the
//! server, one command per message.

use std::fmt;
use std::str::FromStr;

use tapemouse_core::{Frame, MouseEvent, Region};
use thiserror::Error;

pub const FRAME_TAG: u8 = 0x01;
pub const FRAME_HEADER_LEN: usize = 13;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("message shorter than the {FRAME_HEADER_LEN}-byte frame header ({0} bytes)")]
    ShortHeader(usize),
    #[error("unknown binary message tag 0x{0:02x}")]
    UnknownTag(u8),
    #[error("header says {width}x{height} ({expected} payload bytes) but {actual} bytes follow")]
    PayloadLength {
        width: u16,
        height: u16,
        expected: usize,
        actual: usize,
    },
    #[error("frame dimensions must be at least 1x1, got {0}x{1}")]
    ZeroDimension(u16, u16),
    #[error("frame {0}x{1} does not fit the 16-bit header fields")]
    TooLarge(u32, u32),
    #[error("unknown control message {0:?}")]
    UnknownControl(String),
    #[error("malformed server message {0:?}")]
    MalformedReply(String),
}

pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, ProtocolError> {
    let (w, h) = frame.dimensions();
    let (Ok(w16), Ok(h16)) = (u16::try_from(w), u16::try_from(h)) else {
        return Err(ProtocolError::TooLarge(w, h));
    };
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + frame.as_bytes().len());
    out.push(FRAME_TAG);
    out.extend_from_slice(&w16.to_be_bytes());
    out.extend_from_slice(&h16.to_be_bytes());
    out.extend_from_slice(&frame.timestamp_ms().to_be_bytes());
    out.extend_from_slice(frame.as_bytes());
    Ok(out)
}

pub fn decode_frame(msg: &[u8]) -> Result<Frame, ProtocolError> {
    if msg.len() < FRAME_HEADER_LEN {
        return Err(ProtocolError::ShortHeader(msg.len()));
    }
    if msg[0] != FRAME_TAG {
        return Err(ProtocolError::UnknownTag(msg[0]));
    }
    let width = u16::from_be_bytes([msg[1], msg[2]]);
    let height = u16::from_be_bytes([msg[3], msg[4]]);
    let mut ts = [0u8; 8];
    ts.copy_from_slice(&msg[5..13]);
    let timestamp_ms = u64::from_be_bytes(ts);
    if width == 0 || height == 0 {
        return Err(ProtocolError::ZeroDimension(width, height));
    }
    let payload = &msg[FRAME_HEADER_LEN..];
    let expected = width as usize * height as usize * 3;
    if payload.len() != expected {
        return Err(ProtocolError::PayloadLength {
            width,
            height,
            expected,
            actual: payload.len(),
        });
    }
    Ok(Frame::new(width as u32, height as u32, payload.to_vec(), timestamp_ms)
        .expect("length checked above"))
}

/// Client-to-server text commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    CalibrateOpenBegin,
    CalibrateOpenEnd,
    CalibratePinchBegin,
    CalibratePinchEnd,
    StreamBegin,
    StreamEnd,
}

impl Control {
    pub fn as_str(self) -> &'static str {
        match self {
            Control::CalibrateOpenBegin => "CALIBRATE_OPEN_BEGIN",
            Control::CalibrateOpenEnd => "CALIBRATE_OPEN_END",
            Control::CalibratePinchBegin => "CALIBRATE_PINCH_BEGIN",
            Control::CalibratePinchEnd => "CALIBRATE_PINCH_END",
            Control::StreamBegin => "STREAM_BEGIN",
            Control::StreamEnd => "STREAM_END",
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Control {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim_end_matches(['\r', '\n']) {
            "CALIBRATE_OPEN_BEGIN" => Control::CalibrateOpenBegin,
            "CALIBRATE_OPEN_END" => Control::CalibrateOpenEnd,
            "CALIBRATE_PINCH_BEGIN" => Control::CalibratePinchBegin,
            "CALIBRATE_PINCH_END" => Control::CalibratePinchEnd,
            "STREAM_BEGIN" => Control::StreamBegin,
            "STREAM_END" => Control::StreamEnd,
            other => return Err(ProtocolError::UnknownControl(other.to_string())),
        })
    }
}

/// Error codes carried by `ERR` replies.
pub mod codes {
    pub const BAD_FRAME: &str = "BAD_FRAME";
    pub const PROTOCOL: &str = "PROTOCOL";
    pub const CALIBRATION: &str = "CALIBRATION";
    pub const NOT_CALIBRATED: &str = "NOT_CALIBRATED";
    pub const PIPELINE: &str = "PIPELINE";
}

/// Server-to-client text messages.
#[derive(Debug, Clone, PartialEq)]
pub enum Reply {
    CalOpen(f64),
    CalPinch(f64),
    Event(MouseEvent),
    Error { code: String, detail: String },
    /// Per-frame readout; `-` marks an undefined distance or an unarmed timer.
    State {
        region: Region,
        distance: Option<f64>,
        dwell_remaining_ms: Option<u64>,
    },
}

impl Reply {
    pub fn error(code: &str, detail: impl fmt::Display) -> Self {
        // Keep the reply on one line.
        let detail = detail.to_string().replace(['\r', '\n'], " ");
        Reply::Error {
            code: code.to_string(),
            detail,
        }
    }
}

impl fmt::Display for Reply {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reply::CalOpen(d) => write!(f, "CAL_OPEN {d}"),
            Reply::CalPinch(d) => write!(f, "CAL_PINCH {d}"),
            Reply::Event(e) => write!(f, "EVT {e}"),
            Reply::Error { code, detail } => write!(f, "ERR {code} {detail}"),
            Reply::State {
                region,
                distance,
                dwell_remaining_ms,
            } => {
                write!(f, "STATE {region} ")?;
                match distance {
                    Some(d) => write!(f, "{d:.2} ")?,
                    None => f.write_str("- ")?,
                }
                match dwell_remaining_ms {
                    Some(ms) => write!(f, "{ms}"),
                    None => f.write_str("-"),
                }
            }
        }
    }
}

impl FromStr for Reply {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProtocolError::MalformedReply(s.to_string());
        let (head, rest) = s.split_once(' ').ok_or_else(bad)?;
        match head {
            "CAL_OPEN" => rest.parse().map(Reply::CalOpen).map_err(|_| bad()),
            "CAL_PINCH" => rest.parse().map(Reply::CalPinch).map_err(|_| bad()),
            "EVT" => rest.parse().map(Reply::Event).map_err(|_| bad()),
            "ERR" => {
                let (code, detail) = rest.split_once(' ').unwrap_or((rest, ""));
                Ok(Reply::Error {
                    code: code.to_string(),
                    detail: detail.to_string(),
                })
            }
            "STATE" => {
                let fields: Vec<&str> = rest.split(' ').collect();
                let [region, d, dwell] = fields[..] else {
                    return Err(bad());
                };
                Ok(Reply::State {
                    region: region.parse().map_err(|_| bad())?,
                    distance: match d {
                        "-" => None,
                        d => Some(d.parse().map_err(|_| bad())?),
                    },
                    dwell_remaining_ms: match dwell {
                        "-" => None,
                        ms => Some(ms.parse().map_err(|_| bad())?),
                    },
                })
            }
            _ => Err(bad()),
        }
    }
}
