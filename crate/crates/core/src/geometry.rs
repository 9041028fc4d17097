//! Raster and geometry primitives: integer boxes, binary masks, morphology
//! and connected components.
//!
//! Boxes use half-open pixel intervals, so a box `(x_min, y_min, x_max, y_max)`
//! covers columns `x_min..x_max` and rows `y_min..y_max`. Morphology treats
//! everything outside the raster as background.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Axis-aligned integer box with half-open coordinates. Always non-empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 4]", into = "[u32; 4]")]
pub struct BBox {
    x_min: u32,
    y_min: u32,
    x_max: u32,
    y_max: u32,
}

impl BBox {
    /// Returns `None` for degenerate coordinates.
    pub fn new(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Option<Self> {
        (x_min < x_max && y_min < y_max).then_some(BBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Box covering a whole `width x height` raster.
    pub fn full(width: u32, height: u32) -> Option<Self> {
        BBox::new(0, 0, width, height)
    }

    /// Box of the given size anchored at `(x, y)`.
    pub fn from_origin_size(x: u32, y: u32, width: u32, height: u32) -> Option<Self> {
        BBox::new(x, y, x.checked_add(width)?, y.checked_add(height)?)
    }

    pub fn x_min(&self) -> u32 {
        self.x_min
    }
    pub fn y_min(&self) -> u32 {
        self.y_min
    }
    pub fn x_max(&self) -> u32 {
        self.x_max
    }
    pub fn y_max(&self) -> u32 {
        self.y_max
    }

    pub fn width(&self) -> u32 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> u32 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }

    /// True when `self` lies completely inside `other`.
    pub fn is_within(&self, other: &BBox) -> bool {
        self.x_min >= other.x_min
            && self.y_min >= other.y_min
            && self.x_max <= other.x_max
            && self.y_max <= other.y_max
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        BBox::new(
            self.x_min.max(other.x_min),
            self.y_min.max(other.y_min),
            self.x_max.min(other.x_max),
            self.y_max.min(other.y_max),
        )
    }

    pub fn translate(&self, dx: u32, dy: u32) -> BBox {
        BBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }

    pub fn to_array(&self) -> [u32; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

impl TryFrom<[u32; 4]> for BBox {
    type Error = String;

    fn try_from(v: [u32; 4]) -> Result<Self, Self::Error> {
        BBox::new(v[0], v[1], v[2], v[3]).ok_or_else(|| format!("degenerate box {v:?}"))
    }
}

impl From<BBox> for [u32; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// Intersection over union of two boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

/// Row-major boolean raster.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.foreground_count())
            .finish()
    }
}

impl BinaryMask {
    /// All-background mask.
    pub fn new(width: u32, height: u32) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn filled(width: u32, height: u32) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        BinaryMask {
            width,
            height,
            bits,
        }
    }

    /// Builds a mask from row-major bits; `None` if the length is wrong.
    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Option<Self> {
        (bits.len() == width as usize * height as usize).then_some(BinaryMask {
            width,
            height,
            bits,
        })
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[self.index(x, y)]
    }

    /// Like [`get`](Self::get) but signed coordinates outside the raster read as background.
    #[inline]
    pub fn get_or_background(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let i = self.index(x, y);
        self.bits[i] = value;
    }

    pub fn row(&self, y: u32) -> &[bool] {
        let start = y as usize * self.width as usize;
        &self.bits[start..start + self.width as usize]
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Iterator over `(x, y)` of foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Smallest box containing every foreground pixel.
    pub fn tight_bbox(&self) -> Option<BBox> {
        let mut bounds: Option<(u32, u32, u32, u32)> = None;
        for y in 0..self.height {
            let row = self.row(y);
            let Some(first) = row.iter().position(|&b| b) else {
                continue;
            };
            let last = row.iter().rposition(|&b| b).unwrap_or(first);
            let (first, last) = (first as u32, last as u32);
            bounds = Some(match bounds {
                None => (first, y, last, y),
                Some((x0, y0, x1, _)) => (x0.min(first), y0, x1.max(last), y),
            });
        }
        bounds.and_then(|(x0, y0, x1, y1)| BBox::new(x0, y0, x1 + 1, y1 + 1))
    }

    /// Copy of the region inside `bbox`, which must lie within the mask.
    pub fn crop(&self, bbox: &BBox) -> BinaryMask {
        assert!(
            bbox.x_max() <= self.width && bbox.y_max() <= self.height,
            "crop box {bbox} outside {}x{} mask",
            self.width,
            self.height
        );
        BinaryMask::from_fn(bbox.width(), bbox.height(), |x, y| {
            self.get(x + bbox.x_min(), y + bbox.y_min())
        })
    }

    /// Adds `border` background pixels on every side.
    pub fn pad(&self, border: u32) -> BinaryMask {
        let mut out = BinaryMask::new(self.width + 2 * border, self.height + 2 * border);
        for (x, y) in self.foreground() {
            out.set(x + border, y + border, true);
        }
        out
    }

    pub fn intersects(&self, other: &BinaryMask) -> bool {
        assert_eq!(self.dimensions(), other.dimensions());
        self.bits.iter().zip(&other.bits).any(|(&a, &b)| a && b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.dimensions(), other.dimensions());
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    /// Foreground of `self` is a subset of foreground of `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        assert_eq!(self.dimensions(), other.dimensions());
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    Square,
    Disk,
}

/// Symmetric structuring element centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuringElement {
    pub shape: KernelShape,
    pub radius: u32,
}

impl StructuringElement {
    pub fn square(radius: u32) -> Self {
        StructuringElement {
            shape: KernelShape::Square,
            radius,
        }
    }

    pub fn disk(radius: u32) -> Self {
        StructuringElement {
            shape: KernelShape::Disk,
            radius,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.radius == 0 {
            return Err("structuring element radius must be at least 1".into());
        }
        Ok(())
    }

    /// Half-width of the footprint on row offset `dy` (|dy| <= radius).
    pub fn half_width(&self, dy: i64) -> u32 {
        let r = self.radius as i64;
        match self.shape {
            KernelShape::Square => self.radius,
            KernelShape::Disk => {
                let rem = r * r - dy * dy;
                // integer sqrt, exact for the small radii used here
                let mut w = (rem as f64).sqrt() as i64;
                while w * w > rem {
                    w -= 1;
                }
                while (w + 1) * (w + 1) <= rem {
                    w += 1;
                }
                w as u32
            }
        }
    }

    /// Whether offset `(dx, dy)` belongs to the footprint.
    pub fn contains(&self, dx: i64, dy: i64) -> bool {
        let r = self.radius as i64;
        dy.abs() <= r && dx.abs() <= self.half_width(dy) as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

/// Binary morphology; see [`MorphOp`]. Output has the input's dimensions.
pub fn morph(m: &BinaryMask, op: MorphOp, k: &StructuringElement) -> BinaryMask {
    debug_assert!(k.radius >= 1);
    match op {
        MorphOp::Erode => erode(m, k),
        MorphOp::Dilate => dilate(m, k),
        MorphOp::Open => dilate(&erode(m, k), k),
        MorphOp::Close => erode(&dilate(m, k), k),
    }
}

pub fn erode(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    row_span_filter(m, k, true)
}

pub fn dilate(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    row_span_filter(m, k, false)
}

/// Shared erosion/dilation kernel. Each footprint row is a horizontal span,
/// so per-row prefix sums answer "all set" / "any set" in O(1).
fn row_span_filter(m: &BinaryMask, k: &StructuringElement, erode: bool) -> BinaryMask {
    let (w, h) = (m.width as i64, m.height as i64);
    let r = k.radius as i64;
    let stride = w as usize + 1;
    let mut prefix = vec![0u32; stride * h as usize];
    for y in 0..h as usize {
        let row = m.row(y as u32);
        let p = &mut prefix[y * stride..(y + 1) * stride];
        for x in 0..w as usize {
            p[x + 1] = p[x] + row[x] as u32;
        }
    }
    let half: Vec<i64> = (-r..=r).map(|dy| k.half_width(dy) as i64).collect();

    let mut out = BinaryMask::new(m.width, m.height);
    for y in 0..h {
        for x in 0..w {
            let mut value = erode;
            for (i, dy) in (-r..=r).enumerate() {
                let hw = half[i];
                let yy = y + dy;
                if yy < 0 || yy >= h {
                    if erode {
                        value = false;
                        break;
                    }
                    continue;
                }
                let lo = x - hw;
                let hi = x + hw + 1;
                let (clo, chi) = (lo.max(0), hi.min(w));
                let p = &prefix[yy as usize * stride..];
                let count = p[chi as usize] - p[clo as usize];
                if erode {
                    if clo != lo || chi != hi || count as i64 != hi - lo {
                        value = false;
                        break;
                    }
                } else if count > 0 {
                    value = true;
                    break;
                }
            }
            if value {
                out.set(x as u32, y as u32, true);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

/// One connected foreground region. `id` is its index in the sorted listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub id: usize,
    pub pixel_count: usize,
    pub bbox: BBox,
}

/// Component listing plus a per-pixel label raster (`None` for background).
#[derive(Debug, Clone)]
pub struct ComponentLabels {
    pub components: Vec<Component>,
    labels: Vec<Option<u32>>,
    width: u32,
}

impl ComponentLabels {
    pub fn label(&self, x: u32, y: u32) -> Option<usize> {
        self.labels[y as usize * self.width as usize + x as usize].map(|l| l as usize)
    }

    /// Mask containing only the pixels of component `id`.
    pub fn component_mask(&self, id: usize) -> BinaryMask {
        let height = (self.labels.len() / self.width.max(1) as usize) as u32;
        let bits = self.labels.iter().map(|l| *l == Some(id as u32)).collect();
        BinaryMask::from_bits(self.width, height, bits).expect("label raster size")
    }
}

/// Connected components sorted by pixel count (descending), ties broken by
/// the smaller `(y_min, x_min)` of the component box.
pub fn connected_components(m: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    label_components(m, connectivity).components
}

pub fn label_components(m: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const N8: [(i64, i64); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    let neighbours: &[(i64, i64)] = match connectivity {
        Connectivity::Four => &N4,
        Connectivity::Eight => &N8,
    };

    let (w, h) = m.dimensions();
    let mut raw: Vec<Option<u32>> = vec![None; w as usize * h as usize];
    let mut found: Vec<(usize, BBox)> = Vec::new();
    let mut queue = VecDeque::new();

    for (sx, sy) in m.foreground() {
        let si = sy as usize * w as usize + sx as usize;
        if raw[si].is_some() {
            continue;
        }
        let label = found.len() as u32;
        raw[si] = Some(label);
        queue.push_back((sx, sy));
        let (mut x0, mut y0, mut x1, mut y1) = (sx, sy, sx, sy);
        let mut count = 0usize;
        while let Some((x, y)) = queue.pop_front() {
            count += 1;
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if !m.get_or_background(nx, ny) {
                    continue;
                }
                let ni = ny as usize * w as usize + nx as usize;
                if raw[ni].is_none() {
                    raw[ni] = Some(label);
                    queue.push_back((nx as u32, ny as u32));
                }
            }
        }
        let bbox = BBox::new(x0, y0, x1 + 1, y1 + 1).expect("component box is non-empty");
        found.push((count, bbox));
    }

    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by_key(|&i| {
        let (count, b) = found[i];
        (std::cmp::Reverse(count), b.y_min(), b.x_min())
    });
    let mut remap = vec![0u32; found.len()];
    let components = order
        .iter()
        .enumerate()
        .map(|(id, &old)| {
            remap[old] = id as u32;
            Component {
                id,
                pixel_count: found[old].0,
                bbox: found[old].1,
            }
        })
        .collect();
    let labels = raw
        .into_iter()
        .map(|l| l.map(|l| remap[l as usize]))
        .collect();
    ComponentLabels {
        components,
        labels,
        width: w,
    }
}

/// The largest 8-connected component of `m`, or `None` for an empty mask.
pub fn largest_component(m: &BinaryMask) -> Option<(Component, BinaryMask)> {
    let labels = label_components(m, Connectivity::Eight);
    let first = *labels.components.first()?;
    Some((first, labels.component_mask(first.id)))
}
