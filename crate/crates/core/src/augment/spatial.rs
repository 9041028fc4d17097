//! Spatial transforms of whole labeled images.
//!
//! Scale and rotate keep the image dimensions and move the boxes with the
//! raster (corner envelope, clipped to the frame; boxes that leave the frame
//! entirely are dropped). The dropout kinds erase pixels but leave every box
//! untouched.

use image::{Rgb, RgbImage};
use rand::Rng;

use super::crop::sample_bilinear;
use super::CoarseDropoutParams;
use crate::dataset::Annotation;
use crate::geometry::BBox;

#[derive(Debug, Clone, PartialEq)]
pub enum SpatialTransform {
    CoarseDropout(CoarseDropoutParams),
    /// Each pixel is zeroed independently with probability `rate`.
    PixelDropout {
        rate: f64,
    },
    /// Zoom about the image centre by `factor`.
    Scale {
        factor: f64,
    },
    /// Counter-clockwise rotation about the image centre.
    Rotate {
        degrees: f64,
    },
}

pub fn spatial_transform(
    img: &RgbImage,
    annotations: &[Annotation],
    t: &SpatialTransform,
    rng: &mut impl Rng,
) -> (RgbImage, Vec<Annotation>) {
    match t {
        SpatialTransform::CoarseDropout(p) => {
            let holes = sample_dropout_holes(img.width(), img.height(), p, rng);
            (apply_holes(img, &holes, p.fill), annotations.to_vec())
        }
        SpatialTransform::PixelDropout { rate } => {
            (pixel_dropout(img, *rate, rng), annotations.to_vec())
        }
        SpatialTransform::Scale { factor } => {
            if *factor == 1.0 {
                return (img.clone(), annotations.to_vec());
            }
            let s = *factor;
            let out = warp(img, |dx, dy| (dx / s, dy / s));
            let boxes = map_boxes(img, annotations, |dx, dy| (dx * s, dy * s));
            (out, boxes)
        }
        SpatialTransform::Rotate { degrees } => {
            if degrees.rem_euclid(360.0) == 0.0 {
                return (img.clone(), annotations.to_vec());
            }
            let (sin, cos) = degrees.to_radians().sin_cos();
            let out = warp(img, |dx, dy| (cos * dx - sin * dy, sin * dx + cos * dy));
            let boxes = map_boxes(img, annotations, |dx, dy| {
                (cos * dx + sin * dy, -sin * dx + cos * dy)
            });
            (out, boxes)
        }
    }
}

/// Random rectangular holes; sides are fractions of the image sides.
pub fn sample_dropout_holes(
    width: u32,
    height: u32,
    p: &CoarseDropoutParams,
    rng: &mut impl Rng,
) -> Vec<BBox> {
    if width == 0 || height == 0 {
        return Vec::new();
    }
    let n = p.holes.sample(rng);
    (0..n)
        .filter_map(|_| {
            let hw =
                ((p.hole_size_fraction.sample(rng) * width as f64).round() as u32).clamp(1, width);
            let hh = ((p.hole_size_fraction.sample(rng) * height as f64).round() as u32)
                .clamp(1, height);
            let x = rng.gen_range(0..=width - hw);
            let y = rng.gen_range(0..=height - hh);
            BBox::from_origin_size(x, y, hw, hh)
        })
        .collect()
}

pub fn apply_holes(img: &RgbImage, holes: &[BBox], fill: u8) -> RgbImage {
    let mut out = img.clone();
    for h in holes {
        for y in h.y_min()..h.y_max() {
            for x in h.x_min()..h.x_max() {
                out.put_pixel(x, y, Rgb([fill; 3]));
            }
        }
    }
    out
}

fn pixel_dropout(img: &RgbImage, rate: f64, rng: &mut impl Rng) -> RgbImage {
    let mut out = img.clone();
    for p in out.pixels_mut() {
        if rng.gen::<f64>() < rate {
            p.0 = [0; 3];
        }
    }
    out
}

/// Resamples `img` through `inverse`, which maps a destination offset from
/// the image centre to a source offset. Pixels mapped outside become black.
fn warp(img: &RgbImage, inverse: impl Fn(f64, f64) -> (f64, f64)) -> RgbImage {
    let (w, h) = img.dimensions();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    RgbImage::from_fn(w, h, |x, y| {
        let (sx, sy) = inverse(x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        let (sx, sy) = (sx + cx, sy + cy);
        if sx < 0.0 || sy < 0.0 || sx > w as f64 || sy > h as f64 {
            Rgb([0; 3])
        } else {
            Rgb(sample_bilinear(img, sx - 0.5, sy - 0.5))
        }
    })
}

fn map_boxes(
    img: &RgbImage,
    annotations: &[Annotation],
    forward: impl Fn(f64, f64) -> (f64, f64),
) -> Vec<Annotation> {
    let (w, h) = img.dimensions();
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    annotations
        .iter()
        .filter_map(|a| {
            let b = a.bbox;
            let corners = [
                (b.x_min(), b.y_min()),
                (b.x_max(), b.y_min()),
                (b.x_min(), b.y_max()),
                (b.x_max(), b.y_max()),
            ];
            let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            for (x, y) in corners {
                let (px, py) = forward(x as f64 - cx, y as f64 - cy);
                let (px, py) = (px + cx, py + cy);
                x0 = x0.min(px);
                y0 = y0.min(py);
                x1 = x1.max(px);
                y1 = y1.max(py);
            }
            let eps = 1e-6;
            let clip = |v: f64, n: u32| v.clamp(0.0, n as f64);
            let nb = BBox::new(
                clip((x0 + eps).floor(), w) as u32,
                clip((y0 + eps).floor(), h) as u32,
                clip((x1 - eps).ceil(), w) as u32,
                clip((y1 - eps).ceil(), h) as u32,
            )?;
            Some(Annotation::new(a.class_label.clone(), nb))
        })
        .collect()
}
