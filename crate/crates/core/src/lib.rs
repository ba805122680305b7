//! Virtual mouse driven by two coloured finger tapes.
//!
//! A yellow tape on the index finger steers the cursor; the distance between
//! it and a red tape on the thumb selects left, right and double clicks.
//! Frames flow through [`segmentation`] and [`tracking`] into [`pointer`] and
//! [`gestures`]; [`engine`] composes them per frame.

pub mod engine;
pub mod gestures;
pub mod imaging;
pub mod pointer;
pub mod segmentation;
pub mod tracking;

pub use engine::{Detection, Detector, Engine, EngineError, FrameOutput, PipelineConfig, StageTimings};
pub use gestures::{Calibration, CalibrationError, EventKind, GestureConfig, GestureState, MouseEvent, Region};
pub use imaging::{Frame, ImageError, Point, Rgb};
pub use pointer::{PointerMode, Resolution, ScreenPoint};
pub use segmentation::{BackgroundModel, BinaryMask, ColorTarget, SegmentationError, SkinHistogram};
pub use tracking::{Connectivity, MarkerId, MarkerObservation};
