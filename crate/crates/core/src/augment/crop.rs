//! Geometric transforms of object crops. Patch and mask always move
//! together; the patch is resampled bilinearly and the mask by nearest
//! neighbour so it stays binary. Results are re-tightened to the mask.

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use rand::Rng;

use super::pixel::{box_blur, clahe};
use super::PasteAugmentation;
use crate::annotate::ObjectCrop;
use crate::error::{Error, Result};
use crate::geometry::BinaryMask;
use crate::rng::RngStream;

/// Bilinear sample at continuous pixel coordinates (pixel centres at integers),
/// clamping to the edge.
pub(crate) fn sample_bilinear(img: &RgbImage, x: f64, y: f64) -> [u8; 3] {
    let (w, h) = img.dimensions();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as u32, y.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let p00 = img.get_pixel(x0, y0).0;
    let p10 = img.get_pixel(x1, y0).0;
    let p01 = img.get_pixel(x0, y1).0;
    let p11 = img.get_pixel(x1, y1).0;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round() as u8;
    }
    out
}

/// Exact rotation by `quarter_turns * 90` degrees counter-clockwise.
fn rotate_quarter(c: &ObjectCrop, quarter_turns: u32) -> (RgbImage, BinaryMask) {
    let (w, h) = c.dimensions();
    match quarter_turns % 4 {
        0 => (c.patch().clone(), c.mask().clone()),
        1 => (
            imageops::rotate270(c.patch()),
            BinaryMask::from_fn(h, w, |x, y| c.mask().get(w - 1 - y, x)),
        ),
        2 => (
            imageops::rotate180(c.patch()),
            BinaryMask::from_fn(w, h, |x, y| c.mask().get(w - 1 - x, h - 1 - y)),
        ),
        _ => (
            imageops::rotate90(c.patch()),
            BinaryMask::from_fn(h, w, |x, y| c.mask().get(y, h - 1 - x)),
        ),
    }
}

/// Rotates a crop counter-clockwise by `degrees` about the patch centre on an
/// expanded canvas, then re-tightens.
pub fn rotate_crop(c: &ObjectCrop, degrees: f64) -> Result<ObjectCrop> {
    let turns = degrees / 90.0;
    if (turns - turns.round()).abs() < 1e-12 {
        let q = (turns.round() as i64).rem_euclid(4) as u32;
        if q == 0 {
            return Ok(c.clone());
        }
        let (patch, mask) = rotate_quarter(c, q);
        return ObjectCrop::new(patch, mask, &c.class_label, &c.source_id, c.origin);
    }

    let (w, h) = c.dimensions();
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let nw = ((w as f64 * cos.abs() + h as f64 * sin.abs()) - 1e-9)
        .ceil()
        .max(1.0) as u32;
    let nh = ((w as f64 * sin.abs() + h as f64 * cos.abs()) - 1e-9)
        .ceil()
        .max(1.0) as u32;
    let (scx, scy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (dcx, dcy) = (nw as f64 / 2.0, nh as f64 / 2.0);

    let mut patch = RgbImage::new(nw, nh);
    let mut mask = BinaryMask::new(nw, nh);
    for y in 0..nh {
        for x in 0..nw {
            // inverse map of the destination pixel centre; y grows downwards,
            // so a visual counter-clockwise turn uses the transposed matrix
            let dx = x as f64 + 0.5 - dcx;
            let dy = y as f64 + 0.5 - dcy;
            let sx = cos * dx - sin * dy + scx;
            let sy = sin * dx + cos * dy + scy;
            if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                continue;
            }
            if c.mask().get(sx as u32, sy as u32) {
                mask.set(x, y, true);
                patch.put_pixel(x, y, Rgb(sample_bilinear(c.patch(), sx - 0.5, sy - 0.5)));
            }
        }
    }
    if mask.is_empty() {
        // sparse masks can fall between destination samples; forward-map
        // each foreground pixel centre instead
        for (sx, sy) in c.mask().foreground() {
            let ox = sx as f64 + 0.5 - scx;
            let oy = sy as f64 + 0.5 - scy;
            let x = (cos * ox + sin * oy + dcx)
                .floor()
                .clamp(0.0, (nw - 1) as f64) as u32;
            let y = (-sin * ox + cos * oy + dcy)
                .floor()
                .clamp(0.0, (nh - 1) as f64) as u32;
            mask.set(x, y, true);
            patch.put_pixel(x, y, *c.patch().get_pixel(sx, sy));
        }
    }
    ObjectCrop::tightened(patch, mask, &c.class_label, &c.source_id, c.origin)
}

/// Resizes a crop by `factor`; the target size is rounded per axis.
pub fn scale_crop(c: &ObjectCrop, factor: f64) -> Result<ObjectCrop> {
    let (w, h) = c.dimensions();
    let nw = (w as f64 * factor).round();
    let nh = (h as f64 * factor).round();
    if !(factor > 0.0) || nw < 1.0 || nh < 1.0 || nw > u32::MAX as f64 || nh > u32::MAX as f64 {
        return Err(Error::Degenerate {
            width: nw.max(0.0) as u32,
            height: nh.max(0.0) as u32,
        });
    }
    resize_crop(c, nw as u32, nh as u32)
}

/// Resizes a crop to exactly `nw x nh` before re-tightening.
pub fn resize_crop(c: &ObjectCrop, nw: u32, nh: u32) -> Result<ObjectCrop> {
    let (w, h) = c.dimensions();
    if (nw, nh) == (w, h) {
        return Ok(c.clone());
    }
    if nw == 0 || nh == 0 {
        return Err(Error::Degenerate {
            width: nw,
            height: nh,
        });
    }
    let patch = imageops::resize(c.patch(), nw, nh, FilterType::Triangle);
    let mask = BinaryMask::from_fn(nw, nh, |x, y| {
        let sx = ((x as u64 * 2 + 1) * w as u64 / (2 * nw as u64)) as u32;
        let sy = ((y as u64 * 2 + 1) * h as u64 / (2 * nh as u64)) as u32;
        c.mask().get(sx.min(w - 1), sy.min(h - 1))
    });
    if mask.is_empty() {
        return Err(Error::Degenerate {
            width: nw,
            height: nh,
        });
    }
    ObjectCrop::tightened(patch, mask, &c.class_label, &c.source_id, c.origin)
}

/// Paste-time augmentation chain: rotation, scaling, blur, CLAHE.
///
/// Each gate draws one value from `stream/"gate"`; parameters come from
/// per-transform child streams, so changing one parameter range does not
/// shift the others.
pub fn augment_for_paste(
    c: &ObjectCrop,
    spec: &PasteAugmentation,
    stream: &RngStream,
) -> Result<ObjectCrop> {
    let mut gate = stream.derive("gate").rng();
    let mut out = c.clone();

    if gate.gen::<f64>() < spec.rotation_probability {
        let angle = spec
            .rotation_degrees
            .sample(&mut stream.derive("rotate").rng());
        out = rotate_crop(&out, angle)?;
    }
    if gate.gen::<f64>() < spec.scale_probability {
        let factor = spec.scale_range.sample(&mut stream.derive("scale").rng());
        out = scale_crop(&out, factor)?;
    }
    if gate.gen::<f64>() < spec.blur_probability {
        let mut rng = stream.derive("blur").rng();
        let k = spec.blur_kernels[rng.gen_range(0..spec.blur_kernels.len())];
        out = out.with_patch(box_blur(out.patch(), k))?;
    }
    if gate.gen::<f64>() < spec.clahe_probability {
        out = out.with_patch(clahe(out.patch(), &spec.clahe))?;
    }
    Ok(out)
}
