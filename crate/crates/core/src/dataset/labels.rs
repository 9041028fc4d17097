//! Normalized center-format label files: one `<class_id> <cx> <cy> <w> <h>`
//! line per box, geometry divided by the image dimensions, six decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::LabeledImage;
use crate::error::{Error, Result};
use crate::geometry::BBox;

pub fn export_labels(img: &LabeledImage, class_index: &BTreeMap<String, usize>) -> Result<String> {
    let (w, h) = img.dimensions();
    let (w, h) = (w as f64, h as f64);
    let mut out = String::new();
    for a in &img.annotations {
        let id = class_index
            .get(&a.class_label)
            .ok_or_else(|| Error::UnknownClass(a.class_label.clone()))?;
        let b = a.bbox;
        let cx = (b.x_min() + b.x_max()) as f64 / 2.0 / w;
        let cy = (b.y_min() + b.y_max()) as f64 / 2.0 / h;
        let bw = b.width() as f64 / w;
        let bh = b.height() as f64 / h;
        writeln!(out, "{id} {cx:.6} {cy:.6} {bw:.6} {bh:.6}").expect("write to string");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRecord {
    pub class_id: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl LabelRecord {
    pub fn area_fraction(&self) -> f64 {
        self.w * self.h
    }
}

/// Parses a label file. `path` is only used for error messages. Blank lines
/// are skipped; values are not range-checked here.
pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::LabelParse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let class_id = fields[0]
            .parse::<usize>()
            .map_err(|e| err(format!("class id {:?}: {e}", fields[0])))?;
        let mut vals = [0f64; 4];
        for (v, f) in vals.iter_mut().zip(&fields[1..]) {
            *v = f
                .parse::<f64>()
                .map_err(|e| err(format!("value {f:?}: {e}")))?;
            if !v.is_finite() {
                return Err(err(format!("value {f:?} is not finite")));
            }
        }
        out.push(LabelRecord {
            class_id,
            cx: vals[0],
            cy: vals[1],
            w: vals[2],
            h: vals[3],
        });
    }
    Ok(out)
}

/// Pixel box of a record on a `width x height` image, rounded to the nearest
/// pixel and clipped to the frame.
pub fn denormalize(r: &LabelRecord, width: u32, height: u32) -> Option<BBox> {
    let (w, h) = (width as f64, height as f64);
    let px = |v: f64, n: f64| (v * n).round().clamp(0.0, n) as u32;
    BBox::new(
        px(r.cx - r.w / 2.0, w),
        px(r.cy - r.h / 2.0, h),
        px(r.cx + r.w / 2.0, w),
        px(r.cy + r.h / 2.0, h),
    )
}
