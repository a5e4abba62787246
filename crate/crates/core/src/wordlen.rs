//! Closed-form sizing of integral-image words.
//!
//! Everything here is exact: worst-case values use [`BigUint`] and memory
//! footprints are rationals, so boundary cases never depend on float rounding.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

/// Word-length reduction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Word wide enough for the largest possible entry of the whole image.
    Full,
    /// Modular storage sized for the largest box that is ever extracted.
    Exact,
    /// Exact bound assuming 96% of box pixels at maximum and 4% at half maximum.
    ModifiedExact,
    /// Pixels requantized by `p` bits with error diffusion.
    Approximate,
    /// Pixels made even, shifted right by `p` bits, box sums shifted back.
    EvenImage,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Full,
        Method::Exact,
        Method::ModifiedExact,
        Method::Approximate,
        Method::EvenImage,
    ];

    /// Whether the method requantizes pixels by a shift amount.
    pub fn uses_shift(self) -> bool {
        matches!(self, Method::Approximate | Method::EvenImage)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Exact => "exact",
            Method::ModifiedExact => "modified-exact",
            Method::Approximate => "approximate",
            Method::EvenImage => "even",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}` (expected full, exact, modified-exact, approximate or even)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Method::Full),
            "exact" => Ok(Method::Exact),
            "modified-exact" | "modified_exact" | "modifiedexact" | "modified" => {
                Ok(Method::ModifiedExact)
            }
            "approximate" | "approx" => Ok(Method::Approximate),
            "even" | "even-image" | "evenimage" => Ok(Method::EvenImage),
            _ => Err(UnknownMethod(s.to_string())),
        }
    }
}

/// A reduction method together with the word geometry it implies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordLengthPlan {
    pub method: Method,
    /// Bits per stored integral-image entry (`L_ii`).
    pub bits: u32,
    /// Bits shifted out of each pixel before integration.
    pub pre_shift: u32,
    /// Left shift applied to recovered box sums.
    pub post_shift: u32,
    /// Pixel depth after the pre-shift (`L_i - p`).
    pub effective_pixel_bits: u32,
}

impl WordLengthPlan {
    /// Checks the structural invariants tying the fields together.
    pub fn is_consistent(&self) -> bool {
        let shift_ok = self.method.uses_shift() || self.pre_shift == 0;
        let post_ok = match self.method {
            Method::EvenImage => self.post_shift == self.pre_shift,
            _ => self.post_shift == 0,
        };
        shift_ok && post_ok && self.bits >= self.effective_pixel_bits && self.bits <= 64
    }
}

/// `(2^L_i - 1) * W * H`, the largest value an integral-image entry can take.
pub fn worst_case_integral_value(width: u64, height: u64, pixel_bits: u32) -> BigUint {
    max_pixel(pixel_bits) * BigUint::from(width) * BigUint::from(height)
}

/// Smallest `L` with `2^L - 1 >= v`; one bit for zero.
pub fn bits_for_value(v: &BigUint) -> u32 {
    (v.bits() as u32).max(1)
}

/// Word length needed to extract any box of up to `max_w x max_h` pixels
/// exactly through modular arithmetic.
pub fn bits_exact(max_w: u64, max_h: u64, pixel_bits: u32) -> u32 {
    bits_for_value(&worst_case_integral_value(max_w, max_h, pixel_bits))
}

/// Word length under the 96%/4% pixel-population assumption.
///
/// The bound `0.96 * full * A + 0.04 * half * A` is scaled by 100 and the
/// comparison `100 * (2^L - 1) >= bound` is done on integers.
pub fn bits_modified_exact(max_w: u64, max_h: u64, pixel_bits: u32) -> u32 {
    assert!(
        pixel_bits >= 2,
        "modified exact bound needs at least 2 pixel bits"
    );
    let area = BigUint::from(max_w) * BigUint::from(max_h);
    let full = max_pixel(pixel_bits);
    let half = max_pixel(pixel_bits - 1);
    let scaled = (full * 96u32 + half * 4u32) * area;
    let (q, r) = scaled.div_rem(&BigUint::from(100u32));
    let needed = if r.is_zero() { q } else { q + BigUint::one() };
    bits_for_value(&needed)
}

/// Packed footprint `W * H * L_ii / 8` in bytes, exact.
pub fn memory_bytes(width: u64, height: u64, bits: u32) -> Ratio<u128> {
    Ratio::new(u128::from(width) * u128::from(height) * u128::from(bits), 8)
}

/// Packed footprint in KiB (1024 bytes).
pub fn memory_kib(width: u64, height: u64, bits: u32) -> Ratio<u128> {
    memory_bytes(width, height, bits) / 1024
}

/// Bits of the smallest standard unsigned container holding `bits` bits.
pub fn container_bits(bits: u32) -> u32 {
    match bits {
        0..=8 => 8,
        9..=16 => 16,
        17..=32 => 32,
        _ => 64,
    }
}

fn max_pixel(bits: u32) -> BigUint {
    (BigUint::one() << bits) - BigUint::one()
}
