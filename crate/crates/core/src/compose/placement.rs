//! Free-spot search against a packed occupancy raster.

use rand::Rng;

use crate::geometry::{self, BinaryMask, StructuringElement};

/// Horizontal foreground runs of a mask, `(row, x_start, x_end)` half-open.
#[derive(Debug, Clone)]
pub struct RowRuns {
    width: u32,
    height: u32,
    runs: Vec<(u32, u32, u32)>,
}

impl RowRuns {
    pub fn of(m: &BinaryMask) -> Self {
        let mut runs = Vec::new();
        for y in 0..m.height() {
            let row = m.row(y);
            let mut x = 0usize;
            while x < row.len() {
                if row[x] {
                    let start = x;
                    while x < row.len() && row[x] {
                        x += 1;
                    }
                    runs.push((y, start as u32, x as u32));
                } else {
                    x += 1;
                }
            }
        }
        RowRuns {
            width: m.width(),
            height: m.height(),
            runs,
        }
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

/// Union of the dilated masks of everything pasted so far, one bit per pixel.
#[derive(Debug, Clone)]
pub struct OccupancyMask {
    width: u32,
    height: u32,
    words_per_row: usize,
    words: Vec<u64>,
}

#[inline]
fn word_mask(lo: usize, hi: usize) -> u64 {
    // bits lo..=hi within one word
    let upper = if hi == 63 {
        u64::MAX
    } else {
        (1u64 << (hi + 1)) - 1
    };
    upper & !((1u64 << lo) - 1)
}

impl OccupancyMask {
    pub fn new(width: u32, height: u32) -> Self {
        let words_per_row = (width as usize).div_ceil(64);
        OccupancyMask {
            width,
            height,
            words_per_row,
            words: vec![0; words_per_row * height as usize],
        }
    }

    pub fn from_mask(m: &BinaryMask) -> Self {
        let mut occ = OccupancyMask::new(m.width(), m.height());
        occ.stamp(&RowRuns::of(m), 0, 0);
        occ
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    fn row(&self, y: u32) -> &[u64] {
        let s = y as usize * self.words_per_row;
        &self.words[s..s + self.words_per_row]
    }

    fn any_in(&self, y: u32, a: u32, b: u32) -> bool {
        let row = self.row(y);
        let (a, b) = (a as usize, b as usize - 1);
        let (wa, wb) = (a / 64, b / 64);
        if wa == wb {
            return row[wa] & word_mask(a % 64, b % 64) != 0;
        }
        row[wa] & word_mask(a % 64, 63) != 0
            || row[wa + 1..wb].iter().any(|&w| w != 0)
            || row[wb] & word_mask(0, b % 64) != 0
    }

    fn set_range(&mut self, y: u32, a: u32, b: u32) {
        let s = y as usize * self.words_per_row;
        let row = &mut self.words[s..s + self.words_per_row];
        let (a, b) = (a as usize, b as usize - 1);
        let (wa, wb) = (a / 64, b / 64);
        if wa == wb {
            row[wa] |= word_mask(a % 64, b % 64);
            return;
        }
        row[wa] |= word_mask(a % 64, 63);
        for w in &mut row[wa + 1..wb] {
            *w = u64::MAX;
        }
        row[wb] |= word_mask(0, b % 64);
    }

    /// Whether `shape` placed with its top-left at `(x, y)` touches any
    /// occupied pixel. The shape must fit inside the canvas.
    pub fn collides(&self, shape: &RowRuns, x: u32, y: u32) -> bool {
        debug_assert!(x + shape.width <= self.width && y + shape.height <= self.height);
        shape
            .runs
            .iter()
            .any(|&(ry, a, b)| self.any_in(y + ry, x + a, x + b))
    }

    /// ORs `shape` in at signed offset `(x, y)`, clipping at the borders.
    pub fn stamp(&mut self, shape: &RowRuns, x: i64, y: i64) {
        for &(ry, a, b) in &shape.runs {
            let yy = y + ry as i64;
            if yy < 0 || yy >= self.height as i64 {
                continue;
            }
            let lo = (x + a as i64).max(0);
            let hi = (x + b as i64).min(self.width as i64);
            if lo < hi {
                self.set_range(yy as u32, lo as u32, hi as u32);
            }
        }
    }

    /// Marks an object mask placed at `(x, y)` dilated by `k`.
    pub fn add_dilated(&mut self, obj: &BinaryMask, x: u32, y: u32, k: &StructuringElement) {
        let r = k.radius;
        let grown = geometry::dilate(&obj.pad(r), k);
        self.stamp(
            &RowRuns::of(&grown),
            x as i64 - r as i64,
            y as i64 - r as i64,
        );
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.row(y)[x as usize / 64] >> (x % 64) & 1 == 1
    }

    pub fn to_mask(&self) -> BinaryMask {
        BinaryMask::from_fn(self.width, self.height, |x, y| self.get(x, y))
    }

    pub fn occupied_fraction(&self) -> f64 {
        let n: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        n as f64 / (self.width as f64 * self.height as f64)
    }
}

/// Rejection-samples a top-left position for `obj` whose foreground misses
/// every occupied pixel and stays on the canvas. Positions are uniform over
/// all in-bounds placements; `None` after `max_attempts` misses.
pub fn find_free_spot(
    occ: &OccupancyMask,
    obj: &BinaryMask,
    max_attempts: u32,
    rng: &mut impl Rng,
) -> Option<(u32, u32)> {
    find_free_spot_runs(occ, &RowRuns::of(obj), max_attempts, rng)
}

pub fn find_free_spot_runs(
    occ: &OccupancyMask,
    shape: &RowRuns,
    max_attempts: u32,
    rng: &mut impl Rng,
) -> Option<(u32, u32)> {
    let (w, h) = shape.dimensions();
    let (cw, ch) = occ.dimensions();
    if w > cw || h > ch {
        return None;
    }
    for _ in 0..max_attempts {
        let x = rng.gen_range(0..=cw - w);
        let y = rng.gen_range(0..=ch - h);
        if !occ.collides(shape, x, y) {
            return Some((x, y));
        }
    }
    None
}
