//! Single-object test scenes with known ground truth.
#![allow(dead_code)]

use bakesynth::{BBox, BinaryMask};
use image::{Rgb, RgbImage};
use rand::Rng;

use super::oracles;

pub struct Scene {
    pub image: RgbImage,
    pub candidates: Vec<BinaryMask>,
    /// Exact box of the object, `[x_min, y_min, x_max, y_max]`.
    pub truth: [u32; 4],
    /// Index of the candidate carrying the object.
    pub object_candidate: usize,
}

/// A disk or rectangle on a random frame, proposed together with
/// background candidates (full frame and a 96% frame) and a smaller partial
/// mask. The object candidate carries speckle in a halo 5 to 12 pixels off
/// the object box, so refinement has something to remove but the candidate
/// stays far from background by IoU.
///
/// Shapes are large enough (disk radius >= 6, rectangle sides >= 5) to be
/// fixed points of the default square radius-2 opening.
pub fn single_object_scene(rng: &mut impl Rng) -> Scene {
    let w = rng.gen_range(90..220u32);
    let h = rng.gen_range(90..220u32);
    let margin = 14i64;
    let (object, truth) = if rng.gen_bool(0.5) {
        let r = rng.gen_range(6..=(w.min(h) as i64 / 4));
        let cx = rng.gen_range(margin + r..w as i64 - margin - r);
        let cy = rng.gen_range(margin + r..h as i64 - margin - r);
        let m = oracles::disk_mask(w, h, cx, cy, r);
        (m, oracles::disk_box(w, h, cx, cy, r).unwrap())
    } else {
        let bw = rng.gen_range(5..=w / 3);
        let bh = rng.gen_range(5..=h / 3);
        let x = rng.gen_range(margin as u32..w - margin as u32 - bw);
        let y = rng.gen_range(margin as u32..h - margin as u32 - bh);
        let b = BBox::from_origin_size(x, y, bw, bh).unwrap();
        (
            BinaryMask::from_fn(w, h, |px, py| b.contains_pixel(px, py)),
            b.to_array(),
        )
    };

    let mut noisy = object.clone();
    let [x0, y0, x1, y1] = truth.map(|v| v as i64);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let dx = (x0 - x).max(x - (x1 - 1)).max(0);
            let dy = (y0 - y).max(y - (y1 - 1)).max(0);
            let d = dx.max(dy);
            if (5..=12).contains(&d) && rng.gen_bool(0.03) {
                noisy.set(x as u32, y as u32, true);
            }
        }
    }

    let partial = BinaryMask::from_fn(w, h, |x, y| object.get(x, y) && x < (x0 + x1) as u32 / 2);
    let inset = BBox::new(w / 50, h / 50, w - w / 50, h - h / 50).unwrap();
    let near_full =
        BinaryMask::from_fn(w, h, |x, y| inset.contains_pixel(x, y) && !object.get(x, y));

    let mut candidates = vec![BinaryMask::filled(w, h), near_full, partial];
    let object_candidate = rng.gen_range(0..=candidates.len());
    candidates.insert(object_candidate, noisy);

    let image = RgbImage::from_fn(w, h, |x, y| {
        if object.get(x, y) {
            Rgb([210, 160, 90])
        } else {
            Rgb([40, 60, (x ^ y) as u8])
        }
    });
    Scene {
        image,
        candidates,
        truth,
        object_candidate,
    }
}
