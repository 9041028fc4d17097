use crate::annotate::ObjectCrop;
use crate::augment::crop::resize_crop;
use crate::error::{Error, Result};

/// Area of the crop's box relative to the canvas.
pub fn area_fraction(c: &ObjectCrop, canvas: (u32, u32)) -> f64 {
    c.bbox().area() as f64 / (canvas.0 as f64 * canvas.1 as f64)
}

/// Rescales a crop whose box covers less than `min_frac` (or more than
/// `max_frac`) of the canvas so that it covers exactly that bound, up to
/// pixel rounding. Upscales round the new size up, downscales round it
/// down, so the result never lands on the wrong side of the bound it was
/// moved to.
pub fn clamp_object_scale(
    c: &ObjectCrop,
    canvas: (u32, u32),
    min_frac: f64,
    max_frac: f64,
) -> Result<ObjectCrop> {
    // re-tightening after nearest-neighbour resampling can shave a row off,
    // so retry a few times from the current state
    let mut out = c.clone();
    for _ in 0..4 {
        let f = area_fraction(&out, canvas);
        let (target, grow) = if f < min_frac {
            (min_frac, true)
        } else if f > max_frac {
            (max_frac, false)
        } else {
            break;
        };
        let s = (target / f).sqrt();
        let (w, h) = out.dimensions();
        let size = |v: u32| {
            let x = v as f64 * s;
            let r = if grow {
                (x - 1e-9).ceil()
            } else {
                (x + 1e-9).floor()
            };
            (r as u32).max(1)
        };
        out = resize_crop(&out, size(w), size(h))?;
    }
    let (w, h) = out.dimensions();
    if w > canvas.0 || h > canvas.1 {
        return Err(Error::CanvasTooSmall {
            object: (w, h),
            canvas,
        });
    }
    Ok(out)
}
