//! Procedural stand-ins for photographed objects and backgrounds, used by
//! tests, benchmarks and the CLI's demo data.

use std::sync::Arc;

use image::{Rgb, RgbImage};
use rand::Rng;

use crate::annotate::{ObjectCrop, Origin};
use crate::compose::ObjectBank;
use crate::dataset::io::class_index_for;
use crate::geometry::BinaryMask;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Filled ellipse.
    Round,
    /// Ellipse with an elliptical bite taken out of one side.
    Crescent,
    /// Ellipse with two holes.
    Knot,
}

const SHAPES: [Shape; 3] = [Shape::Round, Shape::Crescent, Shape::Knot];

fn inside(dx: f64, dy: f64, a: f64, b: f64) -> bool {
    (dx / a).powi(2) + (dy / b).powi(2) <= 1.0
}

/// Mask of `shape` with semi-axes `a >= b`, tightened.
pub fn shape_mask(shape: Shape, a: f64, b: f64) -> BinaryMask {
    let w = (2.0 * a).ceil() as u32 + 1;
    let h = (2.0 * b).ceil() as u32 + 1;
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let m = BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        if !inside(dx, dy, a, b) {
            return false;
        }
        match shape {
            Shape::Round => true,
            Shape::Crescent => !inside(dx, dy + 0.55 * b, 0.75 * a, 0.8 * b),
            Shape::Knot => {
                !inside(dx - 0.4 * a, dy, 0.28 * a, 0.45 * b)
                    && !inside(dx + 0.4 * a, dy, 0.28 * a, 0.45 * b)
            }
        }
    });
    let tight = m.tight_bbox().expect("shape has foreground");
    m.crop(&tight)
}

/// A shaded crop of `shape` in a class-specific colour.
pub fn object_crop(
    shape: Shape,
    a: f64,
    b: f64,
    colour: [u8; 3],
    class_label: &str,
    source_id: &str,
    rng: &mut impl Rng,
) -> ObjectCrop {
    let mask = shape_mask(shape, a, b);
    let (w, h) = mask.dimensions();
    let patch = RgbImage::from_fn(w, h, |x, y| {
        // darker towards the rim, with grain
        let (dx, dy) = (x as f64 / w as f64 - 0.5, y as f64 / h as f64 - 0.5);
        let shade = 1.0 - 0.6 * (dx * dx + dy * dy);
        let grain: f64 = rng.gen_range(-12.0..12.0);
        Rgb(colour.map(|c| (c as f64 * shade + grain).clamp(0.0, 255.0) as u8))
    });
    ObjectCrop::new(patch, mask, class_label, source_id, Origin::Captured)
        .expect("shape masks are tight")
}

/// Class names `class_00`, `class_01`, ...
pub fn class_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("class_{i:02}")).collect()
}

/// A bank with `counts[i]` crops of class `i`. Each class has a fixed shape
/// and colour; sizes vary so native box fractions on a 1280x960 canvas
/// spread over roughly 0.2% to 4.4%, so most crops need upscaling.
pub fn synthetic_bank(counts: &[usize], seed: u64) -> ObjectBank {
    let names = class_names(counts.len());
    let stream = RngStream::new(seed, "fixture-bank");
    let mut crops = Vec::new();
    for (i, (&n, name)) in counts.iter().zip(&names).enumerate() {
        let mut rng = stream.derive(name).rng();
        let shape = SHAPES[i % SHAPES.len()];
        let colour = [
            rng.gen_range(120..240),
            rng.gen_range(70..180),
            rng.gen_range(20..110),
        ];
        for j in 0..n {
            let b = rng.gen_range(25.0..95.0);
            let a = b * rng.gen_range(1.0..1.5);
            let id = format!("{name}_{j:04}");
            crops.push(Arc::new(object_crop(
                shape, a, b, colour, name, &id, &mut rng,
            )));
        }
    }
    ObjectBank::new(crops, class_index_for(&names)).expect("fixture bank is valid")
}

/// Counts with the share pattern of a real capture set: `n_low` classes
/// between 1% and 2.5%, the rest sharing the remainder about evenly.
pub fn skewed_counts(n_classes: usize, n_low: usize, total: usize) -> Vec<usize> {
    let mut counts = Vec::with_capacity(n_classes);
    let mut used = 0;
    for i in 0..n_low {
        let share = 0.01 + 0.015 * i as f64 / n_low.max(2) as f64;
        let c = ((share * total as f64).round() as usize).max(1);
        counts.push(c);
        used += c;
    }
    let rest = n_classes - n_low;
    for i in 0..rest {
        let base = (total - used) / rest;
        counts.push(if i < (total - used) % rest {
            base + 1
        } else {
            base
        });
    }
    counts
}

/// Textured tabletop-like backgrounds.
pub fn backgrounds(n: usize, dims: (u32, u32), seed: u64) -> Vec<RgbImage> {
    let stream = RngStream::new(seed, "fixture-backgrounds");
    (0..n)
        .map(|i| {
            let mut rng = stream.derive(i.to_string()).rng();
            let base: [f64; 3] = [
                rng.gen_range(60.0..200.0),
                rng.gen_range(60.0..200.0),
                rng.gen_range(60.0..200.0),
            ];
            let (fx, fy) = (rng.gen_range(0.005..0.05), rng.gen_range(0.005..0.05));
            RgbImage::from_fn(dims.0, dims.1, |x, y| {
                let wave = 25.0 * ((x as f64 * fx).sin() + (y as f64 * fy).cos());
                Rgb(base.map(|c| (c + wave).clamp(0.0, 255.0) as u8))
            })
        })
        .collect()
}
