#![allow(dead_code)]

use tapemouse_core::imaging::{synth_frame, DiskSpec};
use tapemouse_core::{Calibration, Frame, PipelineConfig, Resolution};

pub const YELLOW: [u8; 3] = [255, 255, 0];
pub const RED: [u8; 3] = [255, 0, 0];
pub const SKIN: [u8; 3] = [200, 150, 120];
pub const BACKDROP: [u8; 3] = [40, 40, 40];
pub const TAPE_RADIUS: f64 = 12.0;

pub const SCENARIO_FRAMES: usize = 300;
pub const SCENARIO_LOG: &str = include_str!("../data/scenario_expected.log");

/// 640x480 camera onto a 1920x1080 screen at 15 fps, so 300 frames span
/// 20 s and fit both 7 s dwells.
pub fn scenario_config() -> PipelineConfig {
    PipelineConfig {
        camera: Resolution::new(640, 480),
        screen: Resolution::new(1920, 1080),
        fps: 15.0,
        ..PipelineConfig::default()
    }
}

pub fn scenario_calibration() -> Calibration {
    Calibration::new(200.0, 40.0).unwrap()
}

/// Both tapes with a skin-coloured hand blob behind them. `None` leaves the
/// scene empty.
pub fn tape_frame(cfg: &PipelineConfig, tapes: Option<((f64, f64), (f64, f64))>, t_ms: u64) -> Frame {
    let mut disks = Vec::new();
    if let Some(((yx, yy), (rx, ry))) = tapes {
        disks.push(DiskSpec::new(yx - 45.0, (yy + ry) / 2.0, 40.0, SKIN));
        disks.push(DiskSpec::new(yx, yy, TAPE_RADIUS, YELLOW));
        disks.push(DiskSpec::new(rx, ry, TAPE_RADIUS, RED));
    }
    synth_frame(cfg.camera.width, cfg.camera.height, BACKDROP, &disks, t_ms).unwrap()
}

/// Tape centres for scenario frame `i`:
///
/// * 0-1: empty scene (background capture)
/// * 2-41: open hand (d = 220) sweeping right 10 px per frame
/// * 42: mid (d = 120); 43-150: pinch (d = 35) held still
/// * 151-279: mid held, yellow jitters 2 px during 200-210
/// * 280-289: open hand sweeping left 20 px per frame
/// * 290-299: hand out of view
pub fn scenario_tapes(i: usize) -> Option<((f64, f64), (f64, f64))> {
    let y = 200.0;
    let at = |x: f64, d: f64| Some(((x, y), (490.0, y + d)));
    match i {
        0..=1 => None,
        2..=41 => {
            let x = 100.0 + 10.0 * (i - 2) as f64;
            Some(((x, y), (x, y + 220.0)))
        }
        42 => at(490.0, 120.0),
        43..=150 => at(490.0, 35.0),
        200..=210 => at(492.0, 120.0),
        151..=279 => at(490.0, 120.0),
        280..=289 => {
            let x = 490.0 - 20.0 * (i - 279) as f64;
            Some(((x, y), (x, y + 220.0)))
        }
        _ => None,
    }
}

pub fn scenario_frame(cfg: &PipelineConfig, i: usize) -> Frame {
    tape_frame(cfg, scenario_tapes(i), cfg.frame_timestamp(i as u64))
}

pub fn scenario_frames(cfg: &PipelineConfig) -> impl Iterator<Item = Frame> + '_ {
    (0..SCENARIO_FRAMES).map(move |i| scenario_frame(cfg, i))
}

/// Open-hand or pinch calibration frames at tape distance `d`.
pub fn calibration_frames(cfg: &PipelineConfig, d: f64, n: usize) -> Vec<Frame> {
    (0..n)
        .map(|i| tape_frame(cfg, Some(((300.0, 150.0), (300.0, 150.0 + d))), cfg.frame_timestamp(i as u64)))
        .collect()
}
