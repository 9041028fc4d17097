//! Brute-force reference implementations. Deliberately naive: every answer
//! comes from enumerating pixels or cells, never from the library's own
//! helpers, so agreement means something.
#![allow(dead_code)]

use bakesynth::geometry::{KernelShape, StructuringElement};
use bakesynth::{BBox, BinaryMask};
use rand::Rng;

/// `(intersection cells, union cells)` by visiting every cell of the
/// bounding grid.
pub fn iou_cells(a: &BBox, b: &BBox) -> (u64, u64) {
    let (x1, y1) = (a.x_max().max(b.x_max()), a.y_max().max(b.y_max()));
    let (mut inter, mut union) = (0u64, 0u64);
    for y in 0..y1 {
        for x in 0..x1 {
            let (ia, ib) = (a.contains_pixel(x, y), b.contains_pixel(x, y));
            inter += (ia && ib) as u64;
            union += (ia || ib) as u64;
        }
    }
    (inter, union)
}

pub fn iou_enum(a: &BBox, b: &BBox) -> f64 {
    let (i, u) = iou_cells(a, b);
    i as f64 / u as f64
}

/// `[x_min, y_min, x_max, y_max]` half-open, by scanning every pixel.
pub fn tight_box_scan(m: &BinaryMask) -> Option<[u32; 4]> {
    let mut out: Option<[u32; 4]> = None;
    for y in 0..m.height() {
        for x in 0..m.width() {
            if m.get(x, y) {
                out = Some(match out {
                    None => [x, y, x + 1, y + 1],
                    Some([a, b, c, d]) => [a.min(x), b.min(y), c.max(x + 1), d.max(y + 1)],
                });
            }
        }
    }
    out
}

/// Footprint offsets, from the shape's definition.
pub fn footprint(k: &StructuringElement) -> Vec<(i64, i64)> {
    let r = k.radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let keep = match k.shape {
                KernelShape::Square => true,
                KernelShape::Disk => dx * dx + dy * dy <= r * r,
            };
            if keep {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn at(m: &BinaryMask, x: i64, y: i64) -> bool {
    x >= 0 && y >= 0 && x < m.width() as i64 && y < m.height() as i64 && m.get(x as u32, y as u32)
}

pub fn dilate_enum(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    let fp = footprint(k);
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        fp.iter()
            .any(|&(dx, dy)| at(m, x as i64 + dx, y as i64 + dy))
    })
}

pub fn erode_enum(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    let fp = footprint(k);
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        fp.iter()
            .all(|&(dx, dy)| at(m, x as i64 + dx, y as i64 + dy))
    })
}

pub fn open_enum(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    dilate_enum(&erode_enum(m, k), k)
}

pub fn close_enum(m: &BinaryMask, k: &StructuringElement) -> BinaryMask {
    erode_enum(&dilate_enum(m, k), k)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Component root of every pixel (`None` for background), by union-find
/// over all neighbouring foreground pairs.
pub fn component_roots(m: &BinaryMask, eight: bool) -> Vec<Option<usize>> {
    let (w, h) = (m.width() as usize, m.height() as usize);
    let mut parent: Vec<usize> = (0..w * h).collect();
    let fg = |x: usize, y: usize| m.get(x as u32, y as u32);
    for y in 0..h {
        for x in 0..w {
            if !fg(x, y) {
                continue;
            }
            let mut nbrs = vec![(x + 1, y), (x, y + 1)];
            if eight {
                nbrs.push((x + 1, y + 1));
                if x > 0 {
                    nbrs.push((x - 1, y + 1));
                }
            }
            for (nx, ny) in nbrs {
                if nx < w && ny < h && fg(nx, ny) {
                    let (a, b) = (find(&mut parent, y * w + x), find(&mut parent, ny * w + nx));
                    parent[a] = b;
                }
            }
        }
    }
    (0..w * h)
        .map(|i| fg(i % w, i / w).then(|| find(&mut parent, i)))
        .collect()
}

/// `(pixel count, [x_min, y_min, x_max, y_max])` per component, sorted by
/// count descending, then `(y_min, x_min)`.
pub fn components_enum(m: &BinaryMask, eight: bool) -> Vec<(usize, [u32; 4])> {
    let roots = component_roots(m, eight);
    let w = m.width() as usize;
    let mut by_root: std::collections::BTreeMap<usize, (usize, [u32; 4])> = Default::default();
    for (i, r) in roots.iter().enumerate() {
        let Some(r) = r else { continue };
        let (x, y) = ((i % w) as u32, (i / w) as u32);
        let e = by_root.entry(*r).or_insert((0, [x, y, x + 1, y + 1]));
        e.0 += 1;
        e.1 = [
            e.1[0].min(x),
            e.1[1].min(y),
            e.1[2].max(x + 1),
            e.1[3].max(y + 1),
        ];
    }
    let mut out: Vec<_> = by_root.into_values().collect();
    out.sort_by_key(|&(n, b)| (std::cmp::Reverse(n), b[1], b[0]));
    out
}

/// Random mask mixing speckle with a few filled rectangles and disks, so
/// components of many sizes occur.
pub fn random_mask(rng: &mut impl Rng, max_side: u32) -> BinaryMask {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let density = rng.gen_range(0.0..0.35);
    let mut m = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density));
    for _ in 0..rng.gen_range(0..4) {
        let (cx, cy) = (rng.gen_range(0..w) as i64, rng.gen_range(0..h) as i64);
        let r = rng.gen_range(1..=(max_side as i64 / 4).max(1));
        let disk = rng.gen_bool(0.5);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (dx, dy) = (x - cx, y - cy);
                let inside = if disk {
                    dx * dx + dy * dy <= r * r
                } else {
                    dx.abs() <= r && dy.abs() <= r
                };
                if inside {
                    m.set(x as u32, y as u32, true);
                }
            }
        }
    }
    m
}

/// Rasterized disk of radius `r` centred on pixel `(cx, cy)`: pixels whose
/// centre lies within `r + 0.5`, i.e. `dx^2 + dy^2 <= r^2 + r` in integers.
pub fn disk_mask(w: u32, h: u32, cx: i64, cy: i64, r: i64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as i64 - cx, y as i64 - cy);
        dx * dx + dy * dy <= r * r + r
    })
}

/// Tight box of a rasterized disk, by arithmetic: for each row offset the
/// widest column offset is the integer square root.
pub fn disk_box(w: u32, h: u32, cx: i64, cy: i64, r: i64) -> Option<[u32; 4]> {
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for dy in -r..=r {
        let y = cy + dy;
        if y < 0 || y >= h as i64 {
            continue;
        }
        let mut hw = 0;
        while (hw + 1) * (hw + 1) + dy * dy <= r * r + r {
            hw += 1;
        }
        let (lo, hi) = ((cx - hw).max(0), (cx + hw).min(w as i64 - 1));
        if lo > hi {
            continue;
        }
        x0 = x0.min(lo);
        x1 = x1.max(hi);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    (x0 <= x1).then(|| [x0 as u32, y0 as u32, x1 as u32 + 1, y1 as u32 + 1])
}
