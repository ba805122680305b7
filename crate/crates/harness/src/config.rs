//! `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Nested settings use
//! dotted keys (`gesture.dwell_ms=7000`). Any key left out keeps its default;
//! [`dump`] writes every key so its output can be edited and read back.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tapemouse_core::{Connectivity, PipelineConfig, PointerMode};

use crate::error::{HarnessError, Result};

pub const KEYS: &[&str] = &[
    "camera.width",
    "camera.height",
    "screen.width",
    "screen.height",
    "fps",
    "mode",
    "yellow.hue_center",
    "yellow.hue_tol",
    "yellow.sat_min",
    "yellow.val_min",
    "red.hue_center",
    "red.hue_tol",
    "red.sat_min",
    "red.val_min",
    "bg_threshold",
    "background_frames",
    "skin_enabled",
    "skin_histogram_path",
    "theta",
    "denoise_window",
    "denoise_majority",
    "min_blob_area",
    "connectivity",
    "gesture.dwell_ms",
    "gesture.stationary_radius_px",
    "gesture.min_calibration_frames",
    "gain",
    "exponent",
];

fn value_of(cfg: &PipelineConfig, key: &str) -> String {
    match key {
        "camera.width" => cfg.camera.width.to_string(),
        "camera.height" => cfg.camera.height.to_string(),
        "screen.width" => cfg.screen.width.to_string(),
        "screen.height" => cfg.screen.height.to_string(),
        "fps" => cfg.fps.to_string(),
        "mode" => cfg.mode.to_string(),
        "yellow.hue_center" => cfg.yellow_target.hue_center.to_string(),
        "yellow.hue_tol" => cfg.yellow_target.hue_tol.to_string(),
        "yellow.sat_min" => cfg.yellow_target.sat_min.to_string(),
        "yellow.val_min" => cfg.yellow_target.val_min.to_string(),
        "red.hue_center" => cfg.red_target.hue_center.to_string(),
        "red.hue_tol" => cfg.red_target.hue_tol.to_string(),
        "red.sat_min" => cfg.red_target.sat_min.to_string(),
        "red.val_min" => cfg.red_target.val_min.to_string(),
        "bg_threshold" => cfg.bg_threshold.to_string(),
        "background_frames" => cfg.background_frames.to_string(),
        "skin_enabled" => cfg.skin_enabled.to_string(),
        "skin_histogram_path" => cfg
            .skin_histogram_path
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_default(),
        "theta" => cfg.skin_theta.to_string(),
        "denoise_window" => cfg.denoise_window.to_string(),
        "denoise_majority" => cfg.denoise_majority.to_string(),
        "min_blob_area" => cfg.min_blob_area.to_string(),
        "connectivity" => cfg.connectivity.as_u8().to_string(),
        "gesture.dwell_ms" => cfg.gesture.dwell_ms.to_string(),
        "gesture.stationary_radius_px" => cfg.gesture.stationary_radius_px.to_string(),
        "gesture.min_calibration_frames" => cfg.gesture.min_calibration_frames.to_string(),
        "gain" => cfg.gain.to_string(),
        "exponent" => cfg.exponent.to_string(),
        _ => unreachable!("unknown key {key}"),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: invalid value {value:?}: {e}"))
}

fn set(cfg: &mut PipelineConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "camera.width" => cfg.camera.width = parse(key, value)?,
        "camera.height" => cfg.camera.height = parse(key, value)?,
        "screen.width" => cfg.screen.width = parse(key, value)?,
        "screen.height" => cfg.screen.height = parse(key, value)?,
        "fps" => cfg.fps = parse(key, value)?,
        "mode" => cfg.mode = value.parse::<PointerMode>()?,
        "yellow.hue_center" => cfg.yellow_target.hue_center = parse(key, value)?,
        "yellow.hue_tol" => cfg.yellow_target.hue_tol = parse(key, value)?,
        "yellow.sat_min" => cfg.yellow_target.sat_min = parse(key, value)?,
        "yellow.val_min" => cfg.yellow_target.val_min = parse(key, value)?,
        "red.hue_center" => cfg.red_target.hue_center = parse(key, value)?,
        "red.hue_tol" => cfg.red_target.hue_tol = parse(key, value)?,
        "red.sat_min" => cfg.red_target.sat_min = parse(key, value)?,
        "red.val_min" => cfg.red_target.val_min = parse(key, value)?,
        "bg_threshold" => cfg.bg_threshold = parse(key, value)?,
        "background_frames" => cfg.background_frames = parse(key, value)?,
        "skin_enabled" => cfg.skin_enabled = parse(key, value)?,
        "skin_histogram_path" => {
            cfg.skin_histogram_path = (!value.is_empty()).then(|| PathBuf::from(value));
        }
        "theta" => cfg.skin_theta = parse(key, value)?,
        "denoise_window" => cfg.denoise_window = parse(key, value)?,
        "denoise_majority" => cfg.denoise_majority = parse(key, value)?,
        "min_blob_area" => cfg.min_blob_area = parse(key, value)?,
        "connectivity" => {
            cfg.connectivity = Connectivity::from_u8(parse(key, value)?)
                .ok_or_else(|| format!("connectivity must be 4 or 8, got {value:?}"))?;
        }
        "gesture.dwell_ms" => cfg.gesture.dwell_ms = parse(key, value)?,
        "gesture.stationary_radius_px" => cfg.gesture.stationary_radius_px = parse(key, value)?,
        "gesture.min_calibration_frames" => cfg.gesture.min_calibration_frames = parse(key, value)?,
        "gain" => cfg.gain = parse(key, value)?,
        "exponent" => cfg.exponent = parse(key, value)?,
        other => return Err(format!("unknown key {other:?}")),
    }
    Ok(())
}

/// Applies the file's overrides on top of the defaults and validates the result.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
            line: idx + 1,
            message: format!("expected key=value, got {line:?}"),
        })?;
        set(&mut cfg, key.trim(), value.trim()).map_err(|message| HarnessError::Config { line: idx + 1, message })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text)
}

/// Every key with its current value, one `key=value` per line.
pub fn dump(cfg: &PipelineConfig) -> String {
    let mut out = String::new();
    for key in KEYS {
        let _ = writeln!(out, "{key}={}", value_of(cfg, key));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), PipelineConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn dotted_overrides() {
        let cfg = parse_config("gesture.dwell_ms=5000\nmode = speed\nscreen.width=2560\nconnectivity=4\n").unwrap();
        assert_eq!(cfg.gesture.dwell_ms, 5000);
        assert_eq!(cfg.mode, PointerMode::Speed);
        assert_eq!(cfg.screen.width, 2560);
        assert_eq!(cfg.connectivity, Connectivity::Four);
    }

    #[test]
    fn dump_round_trips() {
        let cfg = PipelineConfig::default();
        let text = dump(&cfg);
        assert_eq!(text.lines().count(), KEYS.len());
        assert!(text.contains("gesture.dwell_ms=7000\n"));
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn every_key_is_overridable() {
        let overrides = [
            ("camera.width", "320"),
            ("camera.height", "240"),
            ("screen.width", "1280"),
            ("screen.height", "720"),
            ("fps", "15.5"),
            ("mode", "speed"),
            ("yellow.hue_center", "55"),
            ("yellow.hue_tol", "12.5"),
            ("yellow.sat_min", "0.35"),
            ("yellow.val_min", "0.25"),
            ("red.hue_center", "350"),
            ("red.hue_tol", "20"),
            ("red.sat_min", "0.6"),
            ("red.val_min", "0.2"),
            ("bg_threshold", "40"),
            ("background_frames", "4"),
            ("skin_enabled", "true"),
            ("skin_histogram_path", "hist/skin.txt"),
            ("theta", "0.4"),
            ("denoise_window", "5"),
            ("denoise_majority", "0.6"),
            ("min_blob_area", "33"),
            ("connectivity", "4"),
            ("gesture.dwell_ms", "6500"),
            ("gesture.stationary_radius_px", "3.5"),
            ("gesture.min_calibration_frames", "12"),
            ("gain", "2.25"),
            ("exponent", "1.1"),
        ];
        assert_eq!(overrides.len(), KEYS.len());
        let text: String = overrides.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let cfg = parse_config(&text).unwrap();
        let defaults = PipelineConfig::default();
        for (key, value) in overrides {
            assert_eq!(value_of(&cfg, key), value, "{key}");
            assert_ne!(value_of(&defaults, key), value, "{key} should differ from its default");
        }
        assert_eq!(dump(&cfg), text);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_config("fps=30\nbogus=1\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 2, .. }), "{err}");
        let err = parse_config("fps\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 1, .. }));
        let err = parse_config("connectivity=6\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { line: 1, .. }));
        assert!(matches!(parse_config("fps=0\n").unwrap_err(), HarnessError::Engine(_)));
    }
}
