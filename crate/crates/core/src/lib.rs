//! SURF-style blob detection over integral images stored at a reduced
//! binary word length.
//!
//! The integral image is held modulo `2^L_ii`; box sums are extracted with
//! wraparound arithmetic and are exact whenever the true sum fits the word.
//! Five sizing methods are provided (see [`Method`]), from the full-width
//! baseline down to shift-based approximations, together with the sizing
//! formulas and the reporting harness that compares them.
//!
//! Response arithmetic is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod analysis;
pub mod integral;
pub mod pixel;
pub mod reduction;
pub mod scalar;
pub mod surf;
pub mod wordlen;

pub use integral::{
    box_sum_checked, CheckedSum, IntegralError, OverflowChecker, ReducedIntegralImage,
};
pub use pixel::{read_pgm, read_pnm_as_gray, write_pgm, GrayImage, ImageError, PnmError, Rect};
pub use reduction::{plan, ReductionConfig, ReductionError};
pub use scalar::Scalar;
pub use surf::{DetectError, DetectOptions, ScaleEntry};
pub use wordlen::{Method, WordLengthPlan};

pub type InterestPoint = surf::InterestPoint<f64>;
pub type InterestPointF32 = surf::InterestPoint<f32>;
pub type ResponseMap = surf::ResponseMap<f64>;
pub type ResponseMapF32 = surf::ResponseMap<f32>;
pub type Detection = surf::Detection<f64>;
pub type Candidate = surf::Candidate<f64>;
