//! Pixel classification stages: background subtraction, histogram skin
//! classification, HSV tolerance masking and a box-majority denoiser.
//!
//! Every stage produces a [`BinaryMask`] with the frame's dimensions. Stages
//! chain through the `restrict` argument: a pixel can only survive a later
//! stage if it was set by the earlier one.

use std::fmt::Write as _;

use thiserror::Error;

use crate::imaging::{rgb_to_hsv, Frame, Hsv, Rgb};

#[derive(Debug, Error, PartialEq)]
pub enum SegmentationError {
    #[error("background capture needs at least one frame")]
    NoBackgroundFrames,
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("bins per channel must divide 256, got {0}")]
    InvalidBinCount(u32),
    #[error("skin histogram has no counts; train or load one before classifying")]
    EmptyHistogram,
    #[error("denoise window must be odd and at least 1, got {0}")]
    EvenWindow(usize),
    #[error("denoise majority must lie in (0, 1], got {0}")]
    InvalidMajority(f64),
    #[error("invalid colour target: {0}")]
    InvalidTarget(String),
    #[error("malformed skin histogram file: {0}")]
    HistogramFormat(String),
}

fn check_dims(expected: (u32, u32), actual: (u32, u32)) -> Result<(), SegmentationError> {
    if expected == actual {
        Ok(())
    } else {
        Err(SegmentationError::DimensionMismatch { expected, actual })
    }
}

/// Per-pixel boolean raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width as usize * height as usize],
        }
    }

    /// Builds a mask from a row-major bit vector. Panics if the length is wrong.
    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width as usize * height as usize, "mask length");
        Self { width, height, bits }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = y as usize * self.width as usize + x as usize;
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dimensions() == other.dimensions()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask, SegmentationError> {
        check_dims(self.dimensions(), other.dimensions())?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(Self::from_bits(self.width, self.height, bits))
    }
}

/// Per-pixel, per-channel mean of the static workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    width: u32,
    height: u32,
    mean: Vec<f32>,
}

impl BackgroundModel {
    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Interleaved RGB means, `width * height * 3` entries.
    pub fn mean(&self) -> &[f32] {
        &self.mean
    }
}

/// Averages one or more frames of the empty scene into a background model.
pub fn capture_background(frames: &[Frame]) -> Result<BackgroundModel, SegmentationError> {
    let first = frames.first().ok_or(SegmentationError::NoBackgroundFrames)?;
    let dims = first.dimensions();
    let mut sums = vec![0u32; first.as_bytes().len()];
    for frame in frames {
        check_dims(dims, frame.dimensions())?;
        for (sum, &v) in sums.iter_mut().zip(frame.as_bytes()) {
            *sum += v as u32;
        }
    }
    let n = frames.len() as f64;
    let mean = sums.into_iter().map(|s| (s as f64 / n) as f32).collect();
    Ok(BackgroundModel {
        width: dims.0,
        height: dims.1,
        mean,
    })
}

/// Foreground where the largest per-channel deviation from the background
/// mean exceeds `threshold`.
pub fn subtract_background(
    frame: &Frame,
    bg: &BackgroundModel,
    threshold: u8,
) -> Result<BinaryMask, SegmentationError> {
    check_dims(bg.dimensions(), frame.dimensions())?;
    let threshold = threshold as f32;
    let bits = frame
        .as_bytes()
        .chunks_exact(3)
        .zip(bg.mean.chunks_exact(3))
        .map(|(px, mean)| {
            px.iter()
                .zip(mean)
                .any(|(&p, &m)| (p as f32 - m).abs() > threshold)
        })
        .collect();
    Ok(BinaryMask::from_bits(frame.width(), frame.height(), bits))
}

/// Per-class 3D RGB colour histograms for skin classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkinHistogram {
    bins_per_channel: u32,
    skin_counts: Vec<u64>,
    nonskin_counts: Vec<u64>,
}

pub const DEFAULT_SKIN_BINS: u32 = 32;

fn validate_bins(bins: u32) -> Result<(), SegmentationError> {
    if bins == 0 || bins > 256 || 256 % bins != 0 {
        Err(SegmentationError::InvalidBinCount(bins))
    } else {
        Ok(())
    }
}

impl SkinHistogram {
    pub fn empty(bins_per_channel: u32) -> Result<Self, SegmentationError> {
        validate_bins(bins_per_channel)?;
        let n = (bins_per_channel as usize).pow(3);
        Ok(Self {
            bins_per_channel,
            skin_counts: vec![0; n],
            nonskin_counts: vec![0; n],
        })
    }

    pub fn from_counts(
        bins_per_channel: u32,
        skin_counts: Vec<u64>,
        nonskin_counts: Vec<u64>,
    ) -> Result<Self, SegmentationError> {
        validate_bins(bins_per_channel)?;
        let n = (bins_per_channel as usize).pow(3);
        if skin_counts.len() != n || nonskin_counts.len() != n {
            return Err(SegmentationError::HistogramFormat(format!(
                "expected {n} bins per class, got {} and {}",
                skin_counts.len(),
                nonskin_counts.len()
            )));
        }
        Ok(Self {
            bins_per_channel,
            skin_counts,
            nonskin_counts,
        })
    }

    pub fn bins_per_channel(&self) -> u32 {
        self.bins_per_channel
    }

    pub fn skin_counts(&self) -> &[u64] {
        &self.skin_counts
    }

    pub fn nonskin_counts(&self) -> &[u64] {
        &self.nonskin_counts
    }

    /// Flat bin index, r-major then g then b.
    pub fn bin_index(&self, rgb: Rgb) -> usize {
        let width = 256 / self.bins_per_channel;
        let bins = self.bins_per_channel as usize;
        let [r, g, b] = rgb.map(|c| (c as u32 / width) as usize);
        (r * bins + g) * bins + b
    }

    pub fn add_sample(&mut self, rgb: Rgb, is_skin: bool) {
        let i = self.bin_index(rgb);
        if is_skin {
            self.skin_counts[i] += 1;
        } else {
            self.nonskin_counts[i] += 1;
        }
    }

    pub fn is_trained(&self) -> bool {
        self.skin_counts.iter().chain(&self.nonskin_counts).any(|&c| c > 0)
    }

    /// Renders the `SKINHIST <bins>` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.skin_counts.len() * 4 + 16);
        let _ = writeln!(out, "SKINHIST {}", self.bins_per_channel);
        for (s, n) in self.skin_counts.iter().zip(&self.nonskin_counts) {
            let _ = writeln!(out, "{s} {n}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, SegmentationError> {
        let bad = |msg: String| SegmentationError::HistogramFormat(msg);
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let bins = header
            .strip_prefix("SKINHIST ")
            .and_then(|b| b.trim().parse::<u32>().ok())
            .ok_or_else(|| bad(format!("bad header line {header:?}")))?;
        validate_bins(bins)?;
        let n = (bins as usize).pow(3);
        let mut skin = Vec::with_capacity(n);
        let mut nonskin = Vec::with_capacity(n);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace().map(str::parse::<u64>);
            match (fields.next(), fields.next(), fields.next()) {
                (Some(Ok(s)), Some(Ok(ns)), None) => {
                    skin.push(s);
                    nonskin.push(ns);
                }
                _ => return Err(bad(format!("line {}: expected two counts", lineno + 2))),
            }
        }
        Self::from_counts(bins, skin, nonskin)
    }
}

/// Counts labelled samples into a fresh histogram pair.
pub fn train_skin_histogram(
    samples: &[(Rgb, bool)],
    bins_per_channel: u32,
) -> Result<SkinHistogram, SegmentationError> {
    let mut hist = SkinHistogram::empty(bins_per_channel)?;
    for &(rgb, is_skin) in samples {
        hist.add_sample(rgb, is_skin);
    }
    Ok(hist)
}

/// `s / (s + n)` over the colour's bin, 0 for bins never seen in training.
pub fn skin_probability(rgb: Rgb, hist: &SkinHistogram) -> f64 {
    let i = hist.bin_index(rgb);
    let s = hist.skin_counts[i];
    let total = s + hist.nonskin_counts[i];
    if total == 0 {
        0.0
    } else {
        s as f64 / total as f64
    }
}

/// Skin where `skin_probability >= theta` over a bin seen during training.
pub fn skin_mask(frame: &Frame, hist: &SkinHistogram, theta: f64) -> Result<BinaryMask, SegmentationError> {
    skin_mask_within(frame, hist, theta, None)
}

/// [`skin_mask`] limited to the set bits of `restrict`.
pub fn skin_mask_within(
    frame: &Frame,
    hist: &SkinHistogram,
    theta: f64,
    restrict: Option<&BinaryMask>,
) -> Result<BinaryMask, SegmentationError> {
    if !hist.is_trained() {
        return Err(SegmentationError::EmptyHistogram);
    }
    if let Some(r) = restrict {
        check_dims(frame.dimensions(), r.dimensions())?;
    }
    let bits = frame
        .pixels()
        .enumerate()
        .map(|(i, rgb)| {
            // Bins never seen in training stay clear even at theta 0.
            let bin = hist.bin_index(rgb);
            let seen = hist.skin_counts[bin] + hist.nonskin_counts[bin] > 0;
            restrict.is_none_or(|r| r.bits[i]) && seen && skin_probability(rgb, hist) >= theta
        })
        .collect();
    Ok(BinaryMask::from_bits(frame.width(), frame.height(), bits))
}

/// A hue window with saturation and value floors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorTarget {
    pub hue_center: f32,
    pub hue_tol: f32,
    pub sat_min: f32,
    pub val_min: f32,
}

impl ColorTarget {
    /// Default window for the yellow cursor tape.
    pub const YELLOW: ColorTarget = ColorTarget {
        hue_center: 60.0,
        hue_tol: 15.0,
        sat_min: 0.4,
        val_min: 0.3,
    };

    /// Default window for the red thumb tape.
    pub const RED: ColorTarget = ColorTarget {
        hue_center: 0.0,
        hue_tol: 15.0,
        sat_min: 0.5,
        val_min: 0.3,
    };

    pub fn validate(&self) -> Result<(), SegmentationError> {
        let err = |m: &str| Err(SegmentationError::InvalidTarget(m.to_string()));
        if !(0.0..360.0).contains(&self.hue_center) {
            return err("hue_center must lie in [0, 360)");
        }
        if !(self.hue_tol > 0.0 && self.hue_tol <= 180.0) {
            return err("hue_tol must lie in (0, 180]");
        }
        if !(0.0..=1.0).contains(&self.sat_min) || !(0.0..=1.0).contains(&self.val_min) {
            return err("sat_min and val_min must lie in [0, 1]");
        }
        Ok(())
    }

    /// Circular hue test plus the floors. Achromatic pixels never match.
    pub fn contains(&self, hsv: Hsv) -> bool {
        if hsv.saturation <= 0.0 || hsv.saturation < self.sat_min || hsv.value < self.val_min {
            return false;
        }
        let diff = (hsv.hue - self.hue_center).abs();
        diff.min(360.0 - diff) <= self.hue_tol
    }
}

pub fn color_mask(
    frame: &Frame,
    target: &ColorTarget,
    restrict: Option<&BinaryMask>,
) -> Result<BinaryMask, SegmentationError> {
    if let Some(r) = restrict {
        check_dims(frame.dimensions(), r.dimensions())?;
    }
    let bits = frame
        .pixels()
        .enumerate()
        .map(|(i, [r, g, b])| {
            restrict.is_none_or(|m| m.bits[i]) && target.contains(rgb_to_hsv(r, g, b))
        })
        .collect();
    Ok(BinaryMask::from_bits(frame.width(), frame.height(), bits))
}

/// Box-majority filter: a bit survives when at least `majority * window^2`
/// of its zero-padded neighbourhood is set.
pub fn denoise(mask: &BinaryMask, window: usize, majority: f64) -> Result<BinaryMask, SegmentationError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(SegmentationError::EvenWindow(window));
    }
    if !(majority > 0.0 && majority <= 1.0) {
        return Err(SegmentationError::InvalidMajority(majority));
    }
    let needed = majority * (window * window) as f64;
    let (w, h) = (mask.width as usize, mask.height as usize);
    let half = window / 2;

    // Summed-area table with a zero row and column in front.
    let stride = w + 1;
    let mut sat = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += mask.bits[y * w + x] as u32;
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }

    let mut bits = Vec::with_capacity(w * h);
    for y in 0..h {
        let y0 = y.saturating_sub(half);
        let y1 = (y + half + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(half);
            let x1 = (x + half + 1).min(w);
            let count = sat[y1 * stride + x1] + sat[y0 * stride + x0] - sat[y0 * stride + x1] - sat[y1 * stride + x0];
            bits.push(count as f64 >= needed);
        }
    }
    Ok(BinaryMask::from_bits(mask.width, mask.height, bits))
}
