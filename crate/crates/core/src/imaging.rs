//! Frames, HSV conversion, binary PPM I/O and a synthetic scene rasterizer.

use std::fmt;

use thiserror::Error;

/// An 8-bit RGB triplet.
pub type Rgb = [u8; 3];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("frame dimensions must be at least 1x1, got {width}x{height}")]
    Dimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferLength { expected: usize, actual: usize },
    #[error("malformed PPM header: {0}")]
    Header(String),
    #[error("unsupported PPM maxval {0}, only 255 is accepted")]
    MaxVal(u32),
    #[error("truncated PPM payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
}

/// A subpixel position in image coordinates (top-left origin).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

/// One RGB8 camera frame, row-major with a top-left origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
    timestamp_ms: u64,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>, timestamp_ms: u64) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Dimensions { width, height });
        }
        let expected = width as usize * height as usize * 3;
        if pixels.len() != expected {
            return Err(ImageError::BufferLength {
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            timestamp_ms,
        })
    }

    /// A frame filled with a single colour.
    pub fn filled(width: u32, height: u32, color: Rgb, timestamp_ms: u64) -> Result<Self, ImageError> {
        let len = width as usize * height as usize;
        let pixels = color.iter().copied().cycle().take(len * 3).collect();
        Self::new(width, height, pixels, timestamp_ms)
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

    pub fn timestamp_ms(&self) -> u64 {
        self.timestamp_ms
    }

    /// Returns the same raster stamped with a different timestamp.
    pub fn with_timestamp(mut self, timestamp_ms: u64) -> Self {
        self.timestamp_ms = timestamp_ms;
        self
    }

    /// Raw interleaved RGB bytes.
    pub fn as_bytes(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Iterates pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.pixels.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Hue in degrees `[0, 360)`, saturation and value as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub hue: f32,
    pub saturation: f32,
    pub value: f32,
}

/// Hexcone RGB to HSV conversion.
///
/// Achromatic inputs (saturation 0) report a hue of 0; callers must test
/// saturation before trusting the hue.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> Hsv {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let value = max as f32 / 255.0;
    if max == 0 {
        return Hsv {
            hue: 0.0,
            saturation: 0.0,
            value,
        };
    }
    let chroma = (max - min) as f32;
    let saturation = chroma / max as f32;
    if max == min {
        return Hsv {
            hue: 0.0,
            saturation,
            value,
        };
    }
    let (rf, gf, bf) = (r as f32, g as f32, b as f32);
    let sector = if max == r {
        (gf - bf) / chroma
    } else if max == g {
        (bf - rf) / chroma + 2.0
    } else {
        (rf - gf) / chroma + 4.0
    };
    let mut hue = sector * 60.0;
    if hue < 0.0 {
        hue += 360.0;
    }
    if hue >= 360.0 {
        hue -= 360.0;
    }
    Hsv {
        hue,
        saturation,
        value,
    }
}

/// Serializes a frame as binary PPM with the canonical `P6\n<w> <h>\n255\n` header.
pub fn save_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.pixels);
    out
}

/// Parses a binary (P6) PPM with maxval 255. The timestamp is left at 0.
pub fn load_ppm(bytes: &[u8]) -> Result<Frame, ImageError> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    if magic != b"P6" {
        return Err(ImageError::Header(format!(
            "expected magic P6, found {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = cursor.number("width")?;
    let height = cursor.number("height")?;
    let maxval = cursor.number("maxval")?;
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cursor.pos) {
        Some(c) if c.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(ImageError::Header("missing whitespace after maxval".into())),
    }
    if width == 0 || height == 0 {
        return Err(ImageError::Dimensions { width, height });
    }
    if maxval != 255 {
        return Err(ImageError::MaxVal(maxval));
    }
    let expected = width as usize * height as usize * 3;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    Frame::new(width, height, payload[..expected].to_vec(), 0)
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8], ImageError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::Header("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &str) -> Result<u32, ImageError> {
        let token = self.token()?;
        std::str::from_utf8(token)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                ImageError::Header(format!(
                    "invalid {field} {:?}",
                    String::from_utf8_lossy(token)
                ))
            })
    }
}

/// A filled disk in a synthetic scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSpec {
    pub center: Point,
    pub radius: f64,
    pub color: Rgb,
}

impl DiskSpec {
    pub const fn new(cx: f64, cy: f64, radius: f64, color: Rgb) -> Self {
        Self {
            center: Point::new(cx, cy),
            radius,
            color,
        }
    }

    /// Pixel-centre sampling: `(px+0.5-cx)^2 + (py+0.5-cy)^2 <= r^2`.
    pub fn covers(&self, px: u32, py: u32) -> bool {
        let dx = px as f64 + 0.5 - self.center.x;
        let dy = py as f64 + 0.5 - self.center.y;
        dx * dx + dy * dy <= self.radius * self.radius
    }
}

/// Rasterizes disks over a solid background, later disks overdrawing earlier ones.
pub fn synth_frame(
    width: u32,
    height: u32,
    background: Rgb,
    disks: &[DiskSpec],
    timestamp_ms: u64,
) -> Result<Frame, ImageError> {
    let mut frame = Frame::filled(width, height, background, timestamp_ms)?;
    let stride = width as usize * 3;
    for disk in disks {
        if disk.radius <= 0.0 {
            continue;
        }
        // Only visit the disk's bounding box.
        let x0 = (disk.center.x - disk.radius - 1.0).floor().max(0.0) as u32;
        let y0 = (disk.center.y - disk.radius - 1.0).floor().max(0.0) as u32;
        let x1 = ((disk.center.x + disk.radius + 1.0).ceil().max(0.0) as u32).min(width);
        let y1 = ((disk.center.y + disk.radius + 1.0).ceil().max(0.0) as u32).min(height);
        for py in y0..y1 {
            for px in x0..x1 {
                if disk.covers(px, py) {
                    let i = py as usize * stride + px as usize * 3;
                    frame.pixels[i..i + 3].copy_from_slice(&disk.color);
                }
            }
        }
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hsv_primaries() {
        assert_eq!(
            rgb_to_hsv(255, 0, 0),
            Hsv { hue: 0.0, saturation: 1.0, value: 1.0 }
        );
        assert_eq!(
            rgb_to_hsv(255, 255, 0),
            Hsv { hue: 60.0, saturation: 1.0, value: 1.0 }
        );
        let gray = rgb_to_hsv(128, 128, 128);
        assert_eq!(gray.hue, 0.0);
        assert_eq!(gray.saturation, 0.0);
        assert!((gray.value - 128.0 / 255.0).abs() < 1e-6);
        assert_eq!(rgb_to_hsv(0, 0, 0).saturation, 0.0);
        assert_eq!(rgb_to_hsv(0, 0, 255).hue, 240.0);
        assert_eq!(rgb_to_hsv(0, 255, 0).hue, 120.0);
        assert_eq!(rgb_to_hsv(255, 0, 255).hue, 300.0);
    }

    #[test]
    fn hsv_hue_stays_below_360() {
        for r in (0..=255u16).step_by(5) {
            for g in (0..=255u16).step_by(5) {
                for b in (0..=255u16).step_by(5) {
                    let hsv = rgb_to_hsv(r as u8, g as u8, b as u8);
                    assert!((0.0..360.0).contains(&hsv.hue), "{r} {g} {b} -> {hsv:?}");
                    assert!((0.0..=1.0).contains(&hsv.saturation));
                    assert!((0.0..=1.0).contains(&hsv.value));
                }
            }
        }
    }

    #[test]
    fn ppm_two_pixel_example() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0, 0, 255, 0]);
        let frame = load_ppm(&bytes).unwrap();
        assert_eq!(frame.dimensions(), (2, 1));
        assert_eq!(frame.pixel(0, 0), [255, 0, 0]);
        assert_eq!(frame.pixel(1, 0), [0, 255, 0]);
        assert_eq!(save_ppm(&frame), bytes);
    }

    #[test]
    fn ppm_errors_are_distinct() {
        assert_eq!(
            load_ppm(b"P6\n0 0\n255\n"),
            Err(ImageError::Dimensions { width: 0, height: 0 })
        );
        assert_eq!(load_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0"), Err(ImageError::MaxVal(65535)));
        assert_eq!(
            load_ppm(b"P6\n2 2\n255\n\0\0\0"),
            Err(ImageError::Truncated { expected: 12, actual: 3 })
        );
        assert!(matches!(load_ppm(b"P3\n1 1\n255\n000"), Err(ImageError::Header(_))));
        assert!(matches!(load_ppm(b"P6\n1"), Err(ImageError::Header(_))));
        assert!(matches!(load_ppm(b"P6\n-1 2\n255\n"), Err(ImageError::Header(_))));
    }

    #[test]
    fn ppm_header_comments_are_skipped() {
        let bytes = b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03";
        let frame = load_ppm(bytes).unwrap();
        assert_eq!(frame.pixel(0, 0), [1, 2, 3]);
    }

    #[test]
    fn ppm_save_layout() {
        let black = Frame::filled(1, 1, [0, 0, 0], 0).unwrap();
        assert_eq!(save_ppm(&black), b"P6\n1 1\n255\n\0\0\0");
        let vga = Frame::filled(640, 480, [9, 9, 9], 0).unwrap();
        assert_eq!(save_ppm(&vga).len(), 15 + 640 * 480 * 3);
    }

    #[test]
    fn frame_rejects_bad_buffers() {
        assert!(matches!(
            Frame::new(2, 2, vec![0; 11], 0),
            Err(ImageError::BufferLength { expected: 12, actual: 11 })
        ));
        assert!(Frame::new(0, 5, vec![], 0).is_err());
    }

    #[test]
    fn synth_disk_matches_brute_force() {
        let yellow = [255, 255, 0];
        let frame = synth_frame(320, 240, [0, 0, 0], &[DiskSpec::new(100.0, 80.0, 10.0, yellow)], 7).unwrap();
        assert_eq!(frame.timestamp_ms(), 7);
        let mut count = 0;
        for py in 0..240 {
            for px in 0..320 {
                let dx = px as f64 + 0.5 - 100.0;
                let dy = py as f64 + 0.5 - 80.0;
                let inside = dx * dx + dy * dy <= 100.0;
                count += inside as usize;
                let expect = if inside { yellow } else { [0, 0, 0] };
                assert_eq!(frame.pixel(px, py), expect, "pixel {px},{py}");
            }
        }
        assert!(count > 300);
    }

    #[test]
    fn synth_later_disks_overdraw() {
        let disks = [
            DiskSpec::new(10.0, 10.0, 6.0, [255, 0, 0]),
            DiskSpec::new(14.0, 10.0, 6.0, [0, 0, 255]),
        ];
        let frame = synth_frame(32, 32, [0, 0, 0], &disks, 0).unwrap();
        assert_eq!(frame.pixel(12, 9), [0, 0, 255]);
        assert_eq!(frame.pixel(5, 9), [255, 0, 0]);
        assert_eq!(synth_frame(32, 32, [0, 0, 0], &disks, 0).unwrap(), frame);
    }

    #[test]
    fn synth_disk_partially_off_frame() {
        let frame = synth_frame(20, 20, [0, 0, 0], &[DiskSpec::new(-2.0, 25.0, 8.0, [1, 1, 1])], 0).unwrap();
        assert_eq!(frame.pixel(0, 19), [1, 1, 1]);
    }
}
