//! Integral images stored as residues modulo `2^L_ii`.
//!
//! Every addition and subtraction is reduced to `L_ii` bits, which is what a
//! fixed-width two's-complement adder does. Box sums extracted through the
//! same modulus are therefore exact whenever the true sum fits in `L_ii` bits.

use std::io::{self, Write};

use thiserror::Error;

use crate::pixel::{GrayImage, Rect};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntegralError {
    #[error("word length {bits} cannot hold a single {pixel_bits}-bit pixel")]
    WordTooNarrow { bits: u32, pixel_bits: u32 },
    #[error("word length {0} exceeds the 64-bit limit")]
    WordTooWide(u32),
    #[error("rect {rect:?} lies outside the {width}x{height} integral image")]
    OutOfBounds {
        rect: Rect,
        width: usize,
        height: usize,
    },
    #[error("image is {img_w}x{img_h} but integral image is {ii_w}x{ii_h}")]
    DimensionMismatch {
        img_w: usize,
        img_h: usize,
        ii_w: usize,
        ii_h: usize,
    },
}

/// Entries in the smallest unsigned container that fits `L_ii` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Entries {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
    U64(Vec<u64>),
}

impl Entries {
    fn from_u64(bits: u32, values: Vec<u64>) -> Self {
        match bits {
            0..=8 => Entries::U8(values.into_iter().map(|v| v as u8).collect()),
            9..=16 => Entries::U16(values.into_iter().map(|v| v as u16).collect()),
            17..=32 => Entries::U32(values.into_iter().map(|v| v as u32).collect()),
            _ => Entries::U64(values),
        }
    }

    #[inline]
    fn get(&self, i: usize) -> u64 {
        match self {
            Entries::U8(v) => u64::from(v[i]),
            Entries::U16(v) => u64::from(v[i]),
            Entries::U32(v) => u64::from(v[i]),
            Entries::U64(v) => v[i],
        }
    }
}

#[inline]
fn mask_for(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Integral image whose entries are residues modulo `2^bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedIntegralImage {
    width: usize,
    height: usize,
    bits: u32,
    entries: Entries,
}

impl ReducedIntegralImage {
    /// Single raster pass of `ii(x,y) = i(x,y) + ii(x-1,y) + ii(x,y-1) - ii(x-1,y-1)`,
    /// with every operation reduced modulo `2^bits`.
    pub fn build(img: &GrayImage, bits: u32) -> Result<Self, IntegralError> {
        if bits > 64 {
            return Err(IntegralError::WordTooWide(bits));
        }
        if bits < img.bits() {
            return Err(IntegralError::WordTooNarrow {
                bits,
                pixel_bits: img.bits(),
            });
        }
        let (w, h) = (img.width(), img.height());
        let mask = mask_for(bits);
        let px = img.pixels();
        let mut values = vec![0u64; w * h];
        for y in 0..h {
            for x in 0..w {
                let left = if x > 0 { values[y * w + x - 1] } else { 0 };
                let up = if y > 0 { values[(y - 1) * w + x] } else { 0 };
                let diag = if x > 0 && y > 0 {
                    values[(y - 1) * w + x - 1]
                } else {
                    0
                };
                let v = u64::from(px[y * w + x])
                    .wrapping_add(left)
                    .wrapping_add(up)
                    .wrapping_sub(diag)
                    & mask;
                values[y * w + x] = v;
            }
        }
        Ok(Self {
            width: w,
            height: h,
            bits,
            entries: Entries::from_u64(bits, values),
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Word length `L_ii`.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        mask_for(self.bits)
    }

    /// Stored residue at `(x, y)`.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.entries.get(y * self.width + x)
    }

    /// Bits per entry of the in-core container.
    pub fn container_bits(&self) -> u32 {
        match self.entries {
            Entries::U8(_) => 8,
            Entries::U16(_) => 16,
            Entries::U32(_) => 32,
            Entries::U64(_) => 64,
        }
    }

    /// Four-lookup box sum, returned as a residue in `[0, 2^L_ii)`.
    ///
    /// Equals the true pixel sum over `r` whenever that sum fits in `L_ii` bits.
    pub fn box_sum(&self, r: Rect) -> Result<u64, IntegralError> {
        if !r.fits(self.width, self.height) {
            return Err(IntegralError::OutOfBounds {
                rect: r,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.box_sum_unchecked(r))
    }

    /// [`box_sum`](Self::box_sum) without the bounds check.
    #[inline]
    pub fn box_sum_unchecked(&self, r: Rect) -> u64 {
        four_corner_sum(r, self.mask(), |x, y| self.get(x, y))
    }

    /// Writes one CSV row per raster row, decimal residues, LF endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut line = String::new();
        for y in 0..self.height {
            line.clear();
            for x in 0..self.width {
                if x > 0 {
                    line.push(',');
                }
                line.push_str(&self.get(x, y).to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// `ii(x1,y1) - ii(x1,y0-1) - ii(x0-1,y1) + ii(x0-1,y0-1)` modulo `mask + 1`,
/// with border terms taken as zero. `fetch` is called once per in-range corner.
#[inline]
pub(crate) fn four_corner_sum(
    r: Rect,
    mask: u64,
    mut fetch: impl FnMut(usize, usize) -> u64,
) -> u64 {
    let a = fetch(r.x1, r.y1);
    let b = if r.y0 > 0 { fetch(r.x1, r.y0 - 1) } else { 0 };
    let c = if r.x0 > 0 { fetch(r.x0 - 1, r.y1) } else { 0 };
    let d = if r.x0 > 0 && r.y0 > 0 {
        fetch(r.x0 - 1, r.y0 - 1)
    } else {
        0
    };
    a.wrapping_sub(b).wrapping_sub(c).wrapping_add(d) & mask
}

/// Result of a box sum validated against the full-precision shadow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckedSum {
    /// Residue extracted from the reduced image.
    pub value: u64,
    /// True when the real sum exceeds `2^L_ii - 1`.
    pub overflowed: bool,
}

/// Reduced integral image paired with an unbounded shadow copy, for flagging
/// box sums whose true value no longer fits the reduced word.
#[derive(Debug, Clone)]
pub struct OverflowChecker<'a> {
    reduced: &'a ReducedIntegralImage,
    shadow: Vec<u128>,
}

impl<'a> OverflowChecker<'a> {
    pub fn new(img: &GrayImage, reduced: &'a ReducedIntegralImage) -> Result<Self, IntegralError> {
        if img.width() != reduced.width || img.height() != reduced.height {
            return Err(IntegralError::DimensionMismatch {
                img_w: img.width(),
                img_h: img.height(),
                ii_w: reduced.width,
                ii_h: reduced.height,
            });
        }
        let w = img.width();
        let mut shadow = vec![0u128; w * img.height()];
        for y in 0..img.height() {
            let mut row = 0u128;
            for x in 0..w {
                row += u128::from(img.get(x, y));
                let up = if y > 0 { shadow[(y - 1) * w + x] } else { 0 };
                shadow[y * w + x] = row + up;
            }
        }
        Ok(Self { reduced, shadow })
    }

    /// Exact pixel sum over `r`.
    pub fn true_sum(&self, r: Rect) -> Result<u128, IntegralError> {
        let (w, h) = (self.reduced.width, self.reduced.height);
        if !r.fits(w, h) {
            return Err(IntegralError::OutOfBounds {
                rect: r,
                width: w,
                height: h,
            });
        }
        let at = |x: usize, y: usize| self.shadow[y * w + x];
        let a = at(r.x1, r.y1);
        let b = if r.y0 > 0 { at(r.x1, r.y0 - 1) } else { 0 };
        let c = if r.x0 > 0 { at(r.x0 - 1, r.y1) } else { 0 };
        let d = if r.x0 > 0 && r.y0 > 0 {
            at(r.x0 - 1, r.y0 - 1)
        } else {
            0
        };
        Ok(a + d - b - c)
    }

    pub fn box_sum_checked(&self, r: Rect) -> Result<CheckedSum, IntegralError> {
        let truth = self.true_sum(r)?;
        let value = self.reduced.box_sum(r)?;
        let overflowed = truth > u128::from(self.reduced.mask());
        if !overflowed {
            assert_eq!(
                u128::from(value),
                truth,
                "in-capacity box sum disagrees with shadow"
            );
        }
        Ok(CheckedSum { value, overflowed })
    }
}

/// One-shot form of [`OverflowChecker::box_sum_checked`].
pub fn box_sum_checked(
    img: &GrayImage,
    ii: &ReducedIntegralImage,
    r: Rect,
) -> Result<CheckedSum, IntegralError> {
    OverflowChecker::new(img, ii)?.box_sum_checked(r)
}
