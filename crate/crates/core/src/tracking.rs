//! Blob extraction for the two finger tapes.

use std::fmt;

use crate::imaging::Point;
use crate::segmentation::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    pub fn as_u8(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    pub fn from_u8(n: u8) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
}

impl BBox {
    /// Containment in continuous coordinates, where pixel `x` spans `[x, x+1)`.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.xmin as f64
            && p.x <= self.xmax as f64 + 1.0
            && p.y >= self.ymin as f64
            && p.y <= self.ymax as f64 + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub area: u32,
    /// Mean of the member pixel centres `(px + 0.5, py + 0.5)`.
    pub centroid: Point,
    pub bbox: BBox,
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        lo
    }
}

/// Two-pass union-find labelling.
///
/// Components come back in raster order of their first pixel.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    const NONE: u32 = u32::MAX;
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut labels = vec![NONE; w * h];
    let mut uf = UnionFind { parent: Vec::new() };

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let mut label = NONE;
            let mut join = |n: u32, label: &mut u32| {
                if n != NONE {
                    *label = if *label == NONE { n } else { uf.union(*label, n) };
                }
            };
            if x > 0 {
                join(labels[i - 1], &mut label);
            }
            if y > 0 {
                join(labels[i - w], &mut label);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        join(labels[i - w - 1], &mut label);
                    }
                    if x + 1 < w {
                        join(labels[i - w + 1], &mut label);
                    }
                }
            }
            labels[i] = if label == NONE { uf.make() } else { label };
        }
    }

    struct Acc {
        area: u32,
        sx: f64,
        sy: f64,
        bbox: BBox,
    }
    // Second pass: slots are allocated as each component's first pixel is
    // met, which gives the raster ordering.
    let mut slot_of_root = vec![NONE; uf.parent.len()];
    let mut accs: Vec<Acc> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let label = labels[y * w + x];
            if label == NONE {
                continue;
            }
            let root = uf.find(label) as usize;
            if slot_of_root[root] == NONE {
                slot_of_root[root] = accs.len() as u32;
                accs.push(Acc {
                    area: 0,
                    sx: 0.0,
                    sy: 0.0,
                    bbox: BBox {
                        xmin: x as u32,
                        ymin: y as u32,
                        xmax: x as u32,
                        ymax: y as u32,
                    },
                });
            }
            let acc = &mut accs[slot_of_root[root] as usize];
            acc.area += 1;
            acc.sx += x as f64 + 0.5;
            acc.sy += y as f64 + 0.5;
            let (x, y) = (x as u32, y as u32);
            acc.bbox.xmin = acc.bbox.xmin.min(x);
            acc.bbox.xmax = acc.bbox.xmax.max(x);
            acc.bbox.ymin = acc.bbox.ymin.min(y);
            acc.bbox.ymax = acc.bbox.ymax.max(y);
        }
    }

    accs.into_iter()
        .map(|a| Component {
            area: a.area,
            centroid: Point::new(a.sx / a.area as f64, a.sy / a.area as f64),
            bbox: a.bbox,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerId {
    /// Index-finger tape driving the cursor.
    Yellow,
    /// Thumb tape.
    Red,
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkerId::Yellow => "YELLOW",
            MarkerId::Red => "RED",
        })
    }
}

/// One tape colour in one frame. `blob` is `None` when the tape was not found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerObservation {
    pub marker_id: MarkerId,
    pub blob: Option<Component>,
}

impl MarkerObservation {
    pub fn absent(marker_id: MarkerId) -> Self {
        Self { marker_id, blob: None }
    }

    /// A present observation with only a centroid, for callers that do not
    /// run segmentation (replays, tests).
    pub fn at(marker_id: MarkerId, centroid: Point) -> Self {
        let px = |v: f64| v.max(0.0).floor() as u32;
        Self {
            marker_id,
            blob: Some(Component {
                area: 1,
                centroid,
                bbox: BBox {
                    xmin: px(centroid.x),
                    ymin: px(centroid.y),
                    xmax: px(centroid.x),
                    ymax: px(centroid.y),
                },
            }),
        }
    }

    pub fn is_present(&self) -> bool {
        self.blob.is_some()
    }

    pub fn centroid(&self) -> Option<Point> {
        self.blob.map(|b| b.centroid)
    }
}

/// Minimum blob area rescaled from the 640x480 reference resolution.
pub fn scaled_min_blob_area(area_at_vga: u32, width: u32, height: u32) -> u32 {
    let scale = (width as f64 * height as f64) / (640.0 * 480.0);
    ((area_at_vga as f64 * scale).round() as u32).max(1)
}

/// Picks the largest component of at least `min_blob_area` pixels. Equal
/// areas resolve to the smaller `(ymin, xmin)`.
pub fn extract_marker(
    mask: &BinaryMask,
    marker_id: MarkerId,
    min_blob_area: u32,
    connectivity: Connectivity,
) -> MarkerObservation {
    let blob = connected_components(mask, connectivity)
        .into_iter()
        .filter(|c| c.area >= min_blob_area)
        .min_by_key(|c| (std::cmp::Reverse(c.area), c.bbox.ymin, c.bbox.xmin));
    MarkerObservation { marker_id, blob }
}

/// Euclidean distance between the two centroids, `None` if either is absent.
pub fn marker_distance(a: &MarkerObservation, b: &MarkerObservation) -> Option<f64> {
    Some(a.centroid()?.distance(b.centroid()?))
}
