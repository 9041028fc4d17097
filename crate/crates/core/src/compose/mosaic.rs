use image::imageops::{self, FilterType};
use image::RgbImage;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Quadrant split point, uniform over the central 20-80% of each side.
pub fn sample_split(canvas: (u32, u32), stream: &RngStream) -> (u32, u32) {
    let mut rng = stream.derive("split").rng();
    let pick = |rng: &mut rand_chacha::ChaCha8Rng, side: u32| {
        let u: f64 = rng.gen_range(0.2..0.8);
        ((u * side as f64).floor() as u32).clamp(1, side - 1)
    };
    let cx = pick(&mut rng, canvas.0);
    let cy = pick(&mut rng, canvas.1);
    (cx, cy)
}

/// Random region of `src` with the aspect of `(qw, qh)`, covering between
/// half and all of the largest such region side-wise, resized to `(qw, qh)`.
fn fill_quadrant(src: &RgbImage, qw: u32, qh: u32, rng: &mut impl Rng) -> RgbImage {
    let (sw, sh) = src.dimensions();
    let t = (sw as f64 / qw as f64).min(sh as f64 / qh as f64);
    let zoom: f64 = rng.gen_range(0.5..=1.0);
    let rw = ((qw as f64 * t * zoom).round() as u32).clamp(1, sw);
    let rh = ((qh as f64 * t * zoom).round() as u32).clamp(1, sh);
    let x = rng.gen_range(0..=sw - rw);
    let y = rng.gen_range(0..=sh - rh);
    let region = imageops::crop_imm(src, x, y, rw, rh).to_image();
    if (rw, rh) == (qw, qh) {
        region
    } else {
        imageops::resize(&region, qw, qh, FilterType::Triangle)
    }
}

/// Four distinct sources tiled around a random split point.
pub fn mosaic_background(
    sources: &[RgbImage],
    canvas: (u32, u32),
    stream: &RngStream,
) -> Result<RgbImage> {
    if sources.len() < 4 {
        return Err(Error::NotEnoughBackgrounds {
            needed: 4,
            got: sources.len(),
        });
    }
    let (w, h) = canvas;
    if w < 2 || h < 2 {
        return Err(Error::Config(format!(
            "canvas {w}x{h} is too small for a mosaic"
        )));
    }
    if let Some(s) = sources.iter().find(|s| s.width() == 0 || s.height() == 0) {
        return Err(Error::Degenerate {
            width: s.width(),
            height: s.height(),
        });
    }

    let (cx, cy) = sample_split(canvas, stream);
    let picks = index::sample(&mut stream.derive("pick").rng(), sources.len(), 4).into_vec();
    let mut rng = stream.derive("crop").rng();
    let quads = [
        (0, 0, cx, cy),
        (cx, 0, w - cx, cy),
        (0, cy, cx, h - cy),
        (cx, cy, w - cx, h - cy),
    ];
    let mut out = RgbImage::new(w, h);
    for (&src, &(x, y, qw, qh)) in picks.iter().zip(quads.iter()) {
        let tile = fill_quadrant(&sources[src], qw, qh, &mut rng);
        imageops::replace(&mut out, &tile, x as i64, y as i64);
    }
    Ok(out)
}
