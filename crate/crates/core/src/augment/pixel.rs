//! Pixel-level transforms. None of them change image dimensions.

use image::RgbImage;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaheParams {
    /// Histogram clip level as a multiple of the mean bin count.
    pub clip_limit: f64,
    /// Number of tiles along (x, y).
    pub tile_grid: [u32; 2],
}

impl Default for ClaheParams {
    fn default() -> Self {
        ClaheParams {
            clip_limit: 2.0,
            tile_grid: [8, 8],
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.clip_limit.is_finite() && self.clip_limit > 0.0) {
            return Err(format!(
                "clahe.clip_limit must be positive, got {}",
                self.clip_limit
            ));
        }
        if self.tile_grid.contains(&0) {
            return Err("clahe.tile_grid entries must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PixelTransform {
    /// Mean filter with an odd square kernel.
    Blur {
        kernel: u32,
    },
    /// Per-channel median with an odd square kernel.
    MedianBlur {
        kernel: u32,
    },
    ToGray,
    Clahe(ClaheParams),
}

pub fn pixel_transform(img: &RgbImage, t: &PixelTransform) -> RgbImage {
    match *t {
        PixelTransform::Blur { kernel } => box_blur(img, kernel),
        PixelTransform::MedianBlur { kernel } => median_blur(img, kernel),
        PixelTransform::ToGray => to_gray(img),
        PixelTransform::Clahe(p) => clahe(img, &p),
    }
}

#[inline]
fn clamp_index(v: i64, n: u32) -> u32 {
    v.clamp(0, n as i64 - 1) as u32
}

/// Separable mean filter, replicating edge pixels. `kernel <= 1` is the identity.
pub fn box_blur(img: &RgbImage, kernel: u32) -> RgbImage {
    if kernel <= 1 || img.width() == 0 || img.height() == 0 {
        return img.clone();
    }
    let r = (kernel / 2) as i64;
    let (w, h) = img.dimensions();
    let n = (2 * r + 1) as u32;

    let mut horiz = vec![[0u32; 3]; w as usize * h as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0u32; 3];
            for dx in -r..=r {
                let p = img.get_pixel(clamp_index(x as i64 + dx, w), y).0;
                for c in 0..3 {
                    acc[c] += p[c] as u32;
                }
            }
            horiz[y as usize * w as usize + x as usize] = acc;
        }
    }
    let total = n * n;
    RgbImage::from_fn(w, h, |x, y| {
        let mut acc = [0u32; 3];
        for dy in -r..=r {
            let s = horiz[clamp_index(y as i64 + dy, h) as usize * w as usize + x as usize];
            for c in 0..3 {
                acc[c] += s[c];
            }
        }
        image::Rgb(acc.map(|v| ((v + total / 2) / total) as u8))
    })
}

/// Per-channel median filter, replicating edge pixels.
pub fn median_blur(img: &RgbImage, kernel: u32) -> RgbImage {
    if kernel <= 1 || img.width() == 0 || img.height() == 0 {
        return img.clone();
    }
    let r = (kernel / 2) as i64;
    let (w, h) = img.dimensions();
    let mut window: Vec<u8> = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    RgbImage::from_fn(w, h, |x, y| {
        let mut out = [0u8; 3];
        for (c, slot) in out.iter_mut().enumerate() {
            window.clear();
            for dy in -r..=r {
                let yy = clamp_index(y as i64 + dy, h);
                for dx in -r..=r {
                    window.push(img.get_pixel(clamp_index(x as i64 + dx, w), yy).0[c]);
                }
            }
            let mid = window.len() / 2;
            *slot = *window.select_nth_unstable(mid).1;
        }
        image::Rgb(out)
    })
}

/// ITU-R BT.601 luma, rounded.
#[inline]
pub fn luma(p: [u8; 3]) -> u8 {
    ((299 * p[0] as u32 + 587 * p[1] as u32 + 114 * p[2] as u32 + 500) / 1000) as u8
}

/// Replaces every channel by the pixel's luma.
pub fn to_gray(img: &RgbImage) -> RgbImage {
    let mut out = img.clone();
    for p in out.pixels_mut() {
        let l = luma(p.0);
        p.0 = [l, l, l];
    }
    out
}

/// Contrast-limited adaptive histogram equalization of the luma channel.
///
/// The luma plane is equalized tile by tile with clipped histograms, the
/// per-tile lookup tables are blended bilinearly between tile centres, and
/// the resulting luma shift is added to all three channels. A tile whose
/// pixels all share one gray level has nothing to equalize and keeps an
/// identity table, so flat images pass through unchanged.
pub fn clahe(img: &RgbImage, params: &ClaheParams) -> RgbImage {
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return img.clone();
    }
    let plane: Vec<u8> = img.pixels().map(|p| luma(p.0)).collect();
    let eq = clahe_plane(&plane, w, h, params);
    let mut out = img.clone();
    for (p, (&before, &after)) in out.pixels_mut().zip(plane.iter().zip(&eq)) {
        let delta = after as i32 - before as i32;
        if delta != 0 {
            p.0 = p.0.map(|c| (c as i32 + delta).clamp(0, 255) as u8);
        }
    }
    out
}

/// Tile boundaries splitting `n` pixels into `tiles` near-equal parts.
fn tile_bounds(n: u32, tiles: u32) -> Vec<u32> {
    (0..=tiles)
        .map(|i| (i as u64 * n as u64 / tiles as u64) as u32)
        .collect()
}

/// Interpolation plan along one axis: for each pixel the two neighbouring
/// tiles and the weight of the second.
fn axis_weights(n: u32, bounds: &[u32]) -> Vec<(usize, usize, f64)> {
    let tiles = bounds.len() - 1;
    let centres: Vec<f64> = (0..tiles)
        .map(|i| (bounds[i] as f64 + bounds[i + 1] as f64) / 2.0)
        .collect();
    (0..n)
        .map(|x| {
            let p = x as f64 + 0.5;
            if p <= centres[0] {
                return (0, 0, 0.0);
            }
            if p >= centres[tiles - 1] {
                return (tiles - 1, tiles - 1, 0.0);
            }
            let i = centres.partition_point(|&c| c <= p) - 1;
            let t = (p - centres[i]) / (centres[i + 1] - centres[i]);
            (i, i + 1, t)
        })
        .collect()
}

fn tile_lut(hist: &mut [u32; 256], area: u32, clip_limit: f64) -> [u8; 256] {
    let mut lut = [0u8; 256];
    if hist.iter().filter(|&&c| c > 0).count() <= 1 {
        for (i, v) in lut.iter_mut().enumerate() {
            *v = i as u8;
        }
        return lut;
    }
    let clip = ((clip_limit * area as f64 / 256.0) as u32).max(1);
    let mut excess = 0u32;
    for c in hist.iter_mut() {
        if *c > clip {
            excess += *c - clip;
            *c = clip;
        }
    }
    let per_bin = excess / 256;
    let remainder = excess % 256;
    for c in hist.iter_mut() {
        *c += per_bin;
    }
    if remainder > 0 {
        let step = (256 / remainder).max(1) as usize;
        for c in hist.iter_mut().step_by(step).take(remainder as usize) {
            *c += 1;
        }
    }
    let mut cdf = 0u64;
    for (v, &c) in lut.iter_mut().zip(hist.iter()) {
        cdf += c as u64;
        *v = ((cdf * 255 + area as u64 / 2) / area as u64).min(255) as u8;
    }
    lut
}

fn clahe_plane(plane: &[u8], w: u32, h: u32, params: &ClaheParams) -> Vec<u8> {
    let gx = params.tile_grid[0].clamp(1, w);
    let gy = params.tile_grid[1].clamp(1, h);
    let xb = tile_bounds(w, gx);
    let yb = tile_bounds(h, gy);

    let mut luts = Vec::with_capacity((gx * gy) as usize);
    for ty in 0..gy as usize {
        for tx in 0..gx as usize {
            let mut hist = [0u32; 256];
            for y in yb[ty]..yb[ty + 1] {
                let row = &plane[y as usize * w as usize..];
                for x in xb[tx]..xb[tx + 1] {
                    hist[row[x as usize] as usize] += 1;
                }
            }
            let area = (xb[tx + 1] - xb[tx]) * (yb[ty + 1] - yb[ty]);
            luts.push(tile_lut(&mut hist, area, params.clip_limit));
        }
    }

    let wx = axis_weights(w, &xb);
    let wy = axis_weights(h, &yb);
    let mut out = Vec::with_capacity(plane.len());
    for (y, &(ty0, ty1, fy)) in wy.iter().enumerate() {
        for (x, &(tx0, tx1, fx)) in wx.iter().enumerate() {
            let v = plane[y * w as usize + x] as usize;
            let at = |ty: usize, tx: usize| luts[ty * gx as usize + tx][v] as f64;
            let top = at(ty0, tx0) * (1.0 - fx) + at(ty0, tx1) * fx;
            let bottom = at(ty1, tx0) * (1.0 - fx) + at(ty1, tx1) * fx;
            out.push((top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}
