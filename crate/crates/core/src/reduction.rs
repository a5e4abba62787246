//! Word-length reduction methods: planning, pixel preprocessing and box-sum
//! recovery.

use thiserror::Error;

use crate::pixel::GrayImage;
use crate::surf::schedule::MIN_IMAGE_SIDE;
use crate::wordlen::{
    bits_exact, bits_for_value, bits_modified_exact, worst_case_integral_value, Method,
    WordLengthPlan,
};

/// Largest box the detector extracts: one lobe of the 195-pixel filter.
pub const DEFAULT_MAX_FILTER_W: u64 = 129;
pub const DEFAULT_MAX_FILTER_H: u64 = 65;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("shift {shift} must be in 1..={max} for {method}")]
    InvalidShift {
        method: Method,
        shift: u32,
        max: u32,
    },
    #[error("shift amount is only meaningful for approximate and even methods, got {shift} for {method}")]
    UnexpectedShift { method: Method, shift: u32 },
    #[error("maximum filter box must be non-empty, got {0}x{1}")]
    EmptyFilter(u64, u64),
    #[error("image {width}x{height} is too small for any filter (need {min} pixels per side)")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("word length {bits} is outside {min}..=64 for {pixel_bits}-bit prepared pixels")]
    InvalidWordLength {
        bits: u32,
        min: u32,
        pixel_bits: u32,
    },
}

/// Requested method and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReductionConfig {
    pub method: Method,
    /// Bits shifted out of each pixel (approximate and even methods only).
    pub shift: u32,
    pub max_filter_w: u64,
    pub max_filter_h: u64,
}

impl ReductionConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            shift: 0,
            max_filter_w: DEFAULT_MAX_FILTER_W,
            max_filter_h: DEFAULT_MAX_FILTER_H,
        }
    }

    pub fn with_shift(method: Method, shift: u32) -> Self {
        Self {
            shift,
            ..Self::new(method)
        }
    }

    pub fn full() -> Self {
        Self::new(Method::Full)
    }

    pub fn exact() -> Self {
        Self::new(Method::Exact)
    }

    pub fn modified_exact() -> Self {
        Self::new(Method::ModifiedExact)
    }

    pub fn approximate(shift: u32) -> Self {
        Self::with_shift(Method::Approximate, shift)
    }

    pub fn even(shift: u32) -> Self {
        Self::with_shift(Method::EvenImage, shift)
    }

    /// Short label such as `exact` or `even:p2`.
    pub fn label(&self) -> String {
        if self.method.uses_shift() {
            format!("{}:p{}", self.method, self.shift)
        } else {
            self.method.to_string()
        }
    }

    pub fn validate(&self, pixel_bits: u32) -> Result<(), ReductionError> {
        if self.max_filter_w == 0 || self.max_filter_h == 0 {
            return Err(ReductionError::EmptyFilter(
                self.max_filter_w,
                self.max_filter_h,
            ));
        }
        if self.method.uses_shift() {
            let max = pixel_bits.saturating_sub(1);
            if self.shift == 0 || self.shift > max {
                return Err(ReductionError::InvalidShift {
                    method: self.method,
                    shift: self.shift,
                    max,
                });
            }
        } else if self.shift != 0 {
            return Err(ReductionError::UnexpectedShift {
                method: self.method,
                shift: self.shift,
            });
        }
        Ok(())
    }
}

/// Derives the word-length plan for `img` and returns the image that should
/// be integrated under it.
pub fn plan(
    img: &GrayImage,
    cfg: &ReductionConfig,
) -> Result<(WordLengthPlan, GrayImage), ReductionError> {
    cfg.validate(img.bits())?;
    if img.width().min(img.height()) < MIN_IMAGE_SIDE {
        return Err(ReductionError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_IMAGE_SIDE,
        });
    }
    let li = img.bits();
    let p = cfg.shift;
    let bits = planned_bits(cfg, img.width() as u64, img.height() as u64, li);
    let (prepared, post_shift) = match cfg.method {
        Method::Full | Method::Exact | Method::ModifiedExact => (img.clone(), 0),
        Method::Approximate => (approximate_preprocess(img, p), 0),
        Method::EvenImage => (even_preprocess(img, p), p),
    };
    let plan = WordLengthPlan {
        method: cfg.method,
        bits,
        pre_shift: p,
        post_shift,
        effective_pixel_bits: li - p,
    };
    debug_assert!(plan.is_consistent());
    Ok((plan, prepared))
}

/// Word length the method assigns to a `width x height` image of
/// `pixel_bits`-bit pixels. `cfg` must already be valid for `pixel_bits`.
/// The largest box is clipped to the image.
pub fn planned_bits(cfg: &ReductionConfig, width: u64, height: u64, pixel_bits: u32) -> u32 {
    let (fw, fh) = (cfg.max_filter_w.min(width), cfg.max_filter_h.min(height));
    match cfg.method {
        Method::Full => bits_for_value(&worst_case_integral_value(width, height, pixel_bits)),
        Method::Exact => bits_exact(fw, fh, pixel_bits),
        Method::ModifiedExact => bits_modified_exact(fw, fh, pixel_bits),
        Method::Approximate => bits_exact(fw, fh, pixel_bits - cfg.shift),
        Method::EvenImage => bits_modified_exact(fw, fh, pixel_bits - cfg.shift),
    }
}

/// Replaces the plan's word length with `bits`. Returns the new plan and
/// whether the override falls below the method's computed bound.
pub fn override_bits(
    plan: &WordLengthPlan,
    bits: u32,
) -> Result<(WordLengthPlan, bool), ReductionError> {
    if bits < plan.effective_pixel_bits || bits > 64 {
        return Err(ReductionError::InvalidWordLength {
            bits,
            min: plan.effective_pixel_bits,
            pixel_bits: plan.effective_pixel_bits,
        });
    }
    Ok((WordLengthPlan { bits, ..*plan }, bits < plan.bits))
}

/// Clears the LSB of every odd pixel, then shifts every pixel right by `p`.
pub fn even_preprocess(img: &GrayImage, p: u32) -> GrayImage {
    assert!(
        p >= 1 && p < img.bits(),
        "shift {p} out of range for {}-bit image",
        img.bits()
    );
    img.map(img.bits() - p, |v| (v & !1) >> p)
        .expect("shifted pixels fit the reduced depth")
}

/// Raster-order error-diffusion requantizer: each pixel's remainder after the
/// `p`-bit shift is carried into the next pixel. The carry runs across row
/// ends and is discarded only after the last pixel.
pub fn approximate_preprocess(img: &GrayImage, p: u32) -> GrayImage {
    approximate_preprocess_with_carry(img, p).0
}

/// As [`approximate_preprocess`], also returning the final discarded carry.
pub fn approximate_preprocess_with_carry(img: &GrayImage, p: u32) -> (GrayImage, u32) {
    assert!(
        p >= 1 && p < img.bits(),
        "shift {p} out of range for {}-bit image",
        img.bits()
    );
    let out_bits = img.bits() - p;
    let out_max = (1u32 << out_bits) - 1;
    let mut carry = 0u32;
    let mut out = Vec::with_capacity(img.pixels().len());
    for &v in img.pixels() {
        let t = u32::from(v) + carry;
        // Saturated runs can push t past the reduced range; the excess
        // stays in the carry.
        let q = (t >> p).min(out_max);
        carry = t - (q << p);
        out.push(q as u16);
    }
    let img = GrayImage::new(img.width(), img.height(), out_bits, out).expect("clamped to depth");
    (img, carry)
}

/// Undoes the even-image pre-shift on an extracted box sum.
#[inline]
pub fn recover_box_value(raw: u64, plan: &WordLengthPlan) -> u64 {
    raw << plan.post_shift
}
