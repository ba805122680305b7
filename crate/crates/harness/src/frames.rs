//! Frame sequences stored as directories of numbered PPM files.

use std::path::{Path, PathBuf};

use tapemouse_core::imaging::{load_ppm, save_ppm};
use tapemouse_core::Frame;

use crate::error::{HarnessError, Result};

/// Lists the `.ppm` files of `dir` in lexicographic order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("ppm")) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

pub fn read_frame(path: &Path, timestamp_ms: u64) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    load_ppm(&bytes)
        .map(|f| f.with_timestamp(timestamp_ms))
        .map_err(|source| HarnessError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Lazily reads a frame directory, stamping frame `i` with
/// `floor(i * 1000 / fps)` milliseconds.
pub struct FrameDir {
    paths: std::vec::IntoIter<PathBuf>,
    index: u64,
    fps: f64,
}

impl FrameDir {
    pub fn open(dir: &Path, fps: f64) -> Result<Self> {
        Ok(Self {
            paths: list_frames(dir)?.into_iter(),
            index: 0,
            fps,
        })
    }

    pub fn remaining(&self) -> usize {
        self.paths.len()
    }
}

impl Iterator for FrameDir {
    type Item = Result<Frame>;

    fn next(&mut self) -> Option<Self::Item> {
        let path = self.paths.next()?;
        let t = (self.index as f64 * 1000.0 / self.fps).floor() as u64;
        self.index += 1;
        Some(read_frame(&path, t))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.paths.size_hint()
    }
}

/// Writes frames as `frame_000001.ppm`, `frame_000002.ppm`, ...
pub fn write_frames<'a>(dir: &Path, frames: impl IntoIterator<Item = &'a Frame>) -> Result<usize> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut n = 0;
    for frame in frames {
        n += 1;
        let path = dir.join(format!("frame_{n:06}.ppm"));
        std::fs::write(&path, save_ppm(frame)).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(n)
}
